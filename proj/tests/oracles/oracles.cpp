#include "oracles.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

namespace oracle {

namespace {

Mat3 rotation_of(const Vec3& theta) {
  const double a = theta.norm();
  if (a == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(a, theta / a).toRotationMatrix();
}

class DenseRod {
public:
  DenseRod(const CantileverProblem& p, int n) : p_(p), n_(n), h_(p.length / n) {
    t_ = p.frame.col(0);
    AF_ = p.frame * p.A * p.frame.transpose();
  }

  int size() const { return 3 * n_; }

  double value(const Eigen::VectorXd& x) const {
    std::vector<Mat3> R(n_ + 1);
    R[0] = Mat3::Identity();
    for (int k = 1; k <= n_; ++k) R[k] = rotation_of(x.segment<3>(3 * (k - 1)));
    double e = 0.0;
    for (int k = 0; k < n_; ++k) e += strain(R[k], R[k + 1]);
    for (int k = 1; k <= n_; ++k) e += load(R[k], k);
    return e;
  }

  // Central differences; each coordinate only touches its neighbouring terms.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    std::vector<Mat3> R(n_ + 1);
    R[0] = Mat3::Identity();
    for (int k = 1; k <= n_; ++k) R[k] = rotation_of(x.segment<3>(3 * (k - 1)));
    Eigen::VectorXd g(size());
    const double eps = 1e-6;
    for (int k = 1; k <= n_; ++k) {
      for (int c = 0; c < 3; ++c) {
        double side[2];
        for (int sgn = 0; sgn < 2; ++sgn) {
          Vec3 th = x.segment<3>(3 * (k - 1));
          th(c) += sgn == 0 ? eps : -eps;
          const Mat3 Rk = rotation_of(th);
          double e = strain(R[k - 1], Rk) + load(Rk, k);
          if (k < n_) e += strain(Rk, R[k + 1]);
          side[sgn] = e;
        }
        g(3 * (k - 1) + c) = (side[0] - side[1]) / (2.0 * eps);
      }
    }
    return g;
  }

  std::vector<Vec3> gamma(const Eigen::VectorXd& x) const {
    std::vector<Vec3> out;
    Mat3 prev = Mat3::Identity();
    for (int k = 1; k <= n_; ++k) {
      const Mat3 next = rotation_of(x.segment<3>(3 * (k - 1)));
      out.push_back(p_.frame.transpose() * omega(prev, next));
      prev = next;
    }
    return out;
  }

private:
  Vec3 omega(const Mat3& R0, const Mat3& R1) const {
    const Mat3 X = R0.transpose() * R1;
    return Vec3(X(2, 1) - X(1, 2), X(0, 2) - X(2, 0), X(1, 0) - X(0, 1)) / (2.0 * h_);
  }

  double strain(const Mat3& R0, const Mat3& R1) const {
    const Vec3 w = omega(R0, R1);
    return h_ * w.dot(AF_ * w);
  }

  double load(const Mat3& Rk, int k) const {
    const double c = k == n_ ? 0.5 * h_ : h_;
    double e = -c * p_.Phi.dot(Rk * t_ - t_);
    if (k == n_) e -= ((Rk - Mat3::Identity()).cwiseProduct(p_.M)).sum();
    return e;
  }

  CantileverProblem p_;
  int n_;
  double h_;
  Vec3 t_;
  Mat3 AF_;
};

struct LbfgsOutcome {
  Eigen::VectorXd x;
  double value;
};

LbfgsOutcome lbfgs(const DenseRod& f, Eigen::VectorXd x) {
  const int m = 20;
  std::deque<Eigen::VectorXd> S, Y;
  double fx = f.value(x);
  Eigen::VectorXd g = f.gradient(x);
  int stalled = 0;
  for (int it = 0; it < 200000 && stalled < 10; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = S[i].dot(q) / Y[i].dot(S[i]);
      q -= alpha[i] * Y[i];
    }
    if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = Y[i].dot(q) / Y[i].dot(S[i]);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd d = -q;
    if (d.dot(g) >= 0.0) {
      d = -g;
      S.clear();
      Y.clear();
    }
    double step = S.empty() ? std::min(1.0, 1e-3 / std::max(g.norm(), 1e-300)) : 1.0;
    double fn = 0.0;
    Eigen::VectorXd xn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * d;
      fn = f.value(xn);
      if (fn <= fx + 1e-4 * step * g.dot(d)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd gn = f.gradient(xn);
    const Eigen::VectorXd s = xn - x, y = gn - g;
    if (s.dot(y) > 1e-14 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      if (static_cast<int>(S.size()) > m) {
        S.pop_front();
        Y.pop_front();
      }
    }
    const double change = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    stalled = change <= 1e-15 * (1.0 + std::abs(fx)) ? stalled + 1 : 0;
  }
  return {x, fx};
}

}  // namespace

OracleResult dense_rod_minimizer(const CantileverProblem& p, int n, int restarts, unsigned seed) {
  const DenseRod f(p, n);
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  OracleResult out;
  out.method = "dense L-BFGS on nodal axis-angle coordinates";
  out.resolution = std::to_string(n) + " intervals, " + std::to_string(restarts) + " restarts";
  Eigen::VectorXd best;
  out.value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(f.size());
    if (r > 0)
      for (int i = 0; i < x0.size(); ++i) x0(i) = noise(rng);
    const LbfgsOutcome res = lbfgs(f, x0);
    out.restart_values.push_back(res.value);
    if (res.value < out.value) {
      out.value = res.value;
      best = res.x;
    }
  }
  for (double v : out.restart_values)
    if (std::abs(v - out.value) > 1e-7 * (1.0 + std::abs(out.value))) out.flagged = true;
  out.gamma = f.gamma(best);
  return out;
}

OracleResult grid_conv_hull_optimum(int slots, int choices,
                                    const std::function<double(const std::vector<int>&)>& objective) {
  if (slots < 1 || slots > 3 || choices < 1 || choices > 60)
    throw std::invalid_argument("grid_conv_hull_optimum: at most 3 slots and 60 choices");
  OracleResult out;
  out.method = "exhaustive enumeration of extreme-point assignments";
  out.resolution = std::to_string(slots) + " slots x " + std::to_string(choices) + " choices";
  out.value = std::numeric_limits<double>::infinity();
  std::vector<int> a(slots, 0);
  while (true) {
    const double v = objective(a);
    if (v < out.value) {
      out.value = v;
      out.assignment = a;
    }
    int i = 0;
    while (i < slots && ++a[i] == choices) a[i++] = 0;
    if (i == slots) break;
  }
  return out;
}

RigidMotion horn_rigid_fit(const std::vector<Vec3>& x, const std::vector<Vec3>& v, const std::vector<double>& w,
                           const Vec3& A) {
  double W = 0.0;
  Vec3 xc = Vec3::Zero(), vc = Vec3::Zero();
  for (std::size_t k = 0; k < x.size(); ++k) {
    W += w[k];
    xc += w[k] * x[k];
    vc += w[k] * v[k];
  }
  xc /= W;
  vc /= W;
  Mat3 S = Mat3::Zero();
  for (std::size_t k = 0; k < x.size(); ++k) S += w[k] * (x[k] - xc) * (v[k] - vc).transpose();
  const double Sxx = S(0, 0), Sxy = S(0, 1), Sxz = S(0, 2);
  const double Syx = S(1, 0), Syy = S(1, 1), Syz = S(1, 2);
  const double Szx = S(2, 0), Szy = S(2, 1), Szz = S(2, 2);
  Eigen::Matrix4d N;
  N << Sxx + Syy + Szz, Syz - Szy, Szx - Sxz, Sxy - Syx,
       Syz - Szy, Sxx - Syy - Szz, Sxy + Syx, Szx + Sxz,
       Szx - Sxz, Sxy + Syx, -Sxx + Syy - Szz, Syz + Szy,
       Sxy - Syx, Szx + Sxz, Syz + Szy, -Sxx - Syy + Szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(N);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  RigidMotion out;
  out.R = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
  out.a = vc - out.R * (xc - A);
  return out;
}

}  // namespace oracle
