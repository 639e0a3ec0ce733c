#include "rodlimit/rotation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace rodlimit {

namespace {

// Coefficients a = (1 - cos t)/t^2, b = (t - sin t)/t^3 with series near 0.
void jacobian_coefficients(double t, double& a, double& b) {
  if (t < 1e-4) {
    const double t2 = t * t;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = (1.0 - std::cos(t)) / (t * t);
    b = (t - std::sin(t)) / (t * t * t);
  }
}

double inverse_coefficient(double t) {
  if (t < 1e-4) return 1.0 / 12.0 + t * t / 720.0;
  return 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
}

}  // namespace

Mat3 exp_so3(const Vec3& w) {
  const double t = w.norm();
  const Mat3 W = skew(w);
  double s, c;
  if (t < 1e-4) {
    const double t2 = t * t;
    s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    c = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    s = std::sin(t) / t;
    c = (1.0 - std::cos(t)) / (t * t);
  }
  return Mat3::Identity() + s * W + c * W * W;
}

Vec3 log_so3(const Mat3& R) {
  const double cos_t = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double t = std::acos(cos_t);
  const Vec3 v = vee(R);  // sin(t) * axis
  if (t < 1e-4) {
    return (1.0 + t * t / 6.0) * v;
  }
  if (M_PI - t > 1e-4) {
    return (t / std::sin(t)) * v;
  }
  // Near a half turn: R + R^T = 2 cos t I + 2 (1 - cos t) a a^T.
  const Mat3 S = 0.5 * (R + R.transpose()) - cos_t * Mat3::Identity();
  Eigen::Index k;
  S.diagonal().maxCoeff(&k);
  Vec3 axis = S.col(k) / std::sqrt(std::max(S(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(v) < 0.0) axis = -axis;
  if (v.norm() < 1e-12) {
    Eigen::Index j;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis(j) < 0.0) axis = -axis;
  }
  return t * axis;
}

bool is_rotation(const Mat3& R, double tol) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 jacobian_left(const Vec3& w) {
  double a, b;
  jacobian_coefficients(w.norm(), a, b);
  const Mat3 W = skew(w);
  return Mat3::Identity() + a * W + b * W * W;
}

Mat3 jacobian_right(const Vec3& w) { return jacobian_left(-w); }

Mat3 jacobian_left_inv(const Vec3& w) {
  const Mat3 W = skew(w);
  return Mat3::Identity() - 0.5 * W + inverse_coefficient(w.norm()) * W * W;
}

Mat3 jacobian_right_inv(const Vec3& w) { return jacobian_left_inv(-w); }

Projection project_to_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  const Vec3 sv = svd.singularValues();
  const double d = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Projection p;
  p.R = U * Vec3(1.0, 1.0, d).asDiagonal() * V.transpose();
  const double scale = std::max(sv(0), 1e-300);
  const double tol = 1e-10 * scale;
  // Two vanishing singular values leave a free rotation; with a reflection,
  // coinciding smallest singular values make the flipped direction ambiguous.
  p.nonunique = sv(0) == 0.0 || sv(1) <= tol || (d < 0.0 && sv(1) - sv(2) <= tol);
  return p;
}

Interpolation geodesic_interpolate(const Mat3& R0, const Mat3& R1, double tau) {
  Interpolation out;
  if (tau == 0.0) {
    out.R = R0;
    return out;
  }
  if (tau == 1.0) {
    out.R = R1;
    return out;
  }
  const Vec3 w = log_so3(R0.transpose() * R1);
  out.half_turn = M_PI - w.norm() < 1e-9;
  out.R = R0 * exp_so3(tau * w);
  return out;
}

double ConvexRotation::certificate_error() const {
  Mat3 sum = Mat3::Zero();
  for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * rotations[k];
  return (sum - M).cwiseAbs().maxCoeff();
}

double ConvexRotation::max_singular_value() const {
  Eigen::JacobiSVD<Mat3> svd(M);
  return svd.singularValues()(0);
}

ConvexRotation conv_combination(const std::vector<double>& weights,
                                const std::vector<Mat3>& rotations, double tol) {
  if (weights.empty() || weights.size() != rotations.size())
    throw DomainError("conv_combination: weights and rotations must be non-empty and of equal length");
  double sum = 0.0;
  for (double w : weights) {
    if (w < -tol) throw DomainError("conv_combination: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > std::max(tol, 1e-12) * weights.size())
    throw DomainError("conv_combination: weights do not sum to 1");
  ConvexRotation c;
  c.M.setZero();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!is_rotation(rotations[k], 1e-9)) throw DomainError("conv_combination: not a rotation");
    c.M += weights[k] * rotations[k];
  }
  c.weights = weights;
  c.rotations = rotations;
  return c;
}

Eigen::Quaterniond to_quaternion(const Mat3& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

namespace {

std::vector<Mat3> octahedral_group() {
  std::vector<Mat3> out;
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m = Mat3::Zero();
      for (int i = 0; i < 3; ++i) m(i, perm[i]) = (signs >> i & 1) ? -1.0 : 1.0;
      if (m.determinant() > 0.0) out.push_back(m);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Mat3 quaternion_matrix(double w, double x, double y, double z) {
  return Eigen::Quaterniond(w, x, y, z).normalized().toRotationMatrix();
}

std::vector<Mat3> icosahedral_group() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Eigen::Vector4d> qs;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d q = Eigen::Vector4d::Zero();
    q(i) = 1.0;
    qs.push_back(q);
  }
  for (int s = 0; s < 16; ++s) {
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q(i) = (s >> i & 1) ? -0.5 : 0.5;
    qs.push_back(q);
  }
  const std::array<double, 4> base{0.0, 0.5, 0.5 * phi, 0.5 / phi};
  std::array<int, 4> perm{0, 1, 2, 3};
  do {
    int inversions = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) inversions += perm[a] > perm[b];
    if (inversions % 2) continue;
    for (int s = 0; s < 8; ++s) {
      Eigen::Vector4d q = Eigen::Vector4d::Zero();
      for (int i = 0; i < 4; ++i) {
        double v = base[i];
        if (i > 0 && (s >> (i - 1) & 1)) v = -v;
        q(perm[i]) = v;
      }
      qs.push_back(q);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<Mat3> out;
  for (const auto& q : qs) {
    const Mat3 R = quaternion_matrix(q(0), q(1), q(2), q(3));
    bool seen = false;
    for (const auto& S : out) {
      if ((S - R).cwiseAbs().maxCoeff() < 1e-9) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(R);
  }
  return out;
}

double radical_inverse(int i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace

std::vector<Mat3> rotation_samples(int count) {
  if (count < 24) throw DomainError("rotation sample count must be at least 24");
  if (count == 24) return octahedral_group();
  if (count < 60) throw DomainError("rotation sample count must be 24 or at least 60");
  std::vector<Mat3> out = icosahedral_group();
  for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
    const double u1 = radical_inverse(k, 2);
    const double u2 = radical_inverse(k, 3);
    const double u3 = radical_inverse(k, 5);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    out.push_back(quaternion_matrix(b * std::cos(2 * M_PI * u3), a * std::sin(2 * M_PI * u2),
                                    a * std::cos(2 * M_PI * u2), b * std::sin(2 * M_PI * u3)));
  }
  return out;
}

}  // namespace rodlimit
