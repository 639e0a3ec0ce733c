#include "rodlimit/solver.hpp"
#include "rodlimit/lp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace rodlimit {

void SolveOptions::validate() const {
  if (max_iterations < 1 || max_outer < 1) throw DomainError("solver: iteration limits must be positive");
  if (!(gradient_tolerance > 0.0) || !(closure_tolerance > 0.0) || !(penalty > 0.0))
    throw DomainError("solver: tolerances and penalty must be positive");
  if (intervals_per_edge < 1) throw DomainError("solver: intervals_per_edge must be >= 1");
  if (sample_count < 24) throw DomainError("solver: rotation sample count must be >= 24");
}

MeshTree build_mesh_tree(const RodMesh& mesh, const std::vector<int>& roots) {
  MeshTree tr;
  const int n = mesh.node_count;
  const int ni = mesh.interval_count();
  tr.parent.assign(n, -1);
  tr.parent_interval.assign(n, -1);
  tr.sign.assign(n, 0.0);
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < mesh.segment_count(); ++i)
    for (int k = 0; k < mesh.intervals_on(i); ++k) {
      const int g = mesh.interval_offset[i] + k;
      tr.interval_start.push_back(mesh.node[i][k]);
      tr.interval_end.push_back(mesh.node[i][k + 1]);
      tr.interval_segment.push_back(i);
      adj[mesh.node[i][k]].push_back(g);
      adj[mesh.node[i][k + 1]].push_back(g);
    }
  std::vector<bool> seen(n, false), used(ni, false);
  std::deque<int> queue;
  for (int r : roots) {
    if (r < 0 || r >= n) throw DomainError("mesh tree: anchor out of range");
    if (!seen[r]) {
      seen[r] = true;
      queue.push_back(r);
    }
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    tr.order.push_back(u);
    for (int g : adj[u]) {
      const int a = tr.interval_start[g], b = tr.interval_end[g];
      const int w = a == u ? b : a;
      if (seen[w]) continue;
      seen[w] = true;
      used[g] = true;
      tr.parent[w] = u;
      tr.parent_interval[w] = g;
      tr.sign[w] = (a == u) ? 1.0 : -1.0;
      queue.push_back(w);
    }
  }
  if (static_cast<int>(tr.order.size()) != n) throw DomainError("mesh tree: a component has no anchor");
  for (int g = 0; g < ni; ++g)
    if (!used[g]) tr.chords.push_back(g);
  return tr;
}

namespace {

// Coefficients a = (1 - cos t)/t^2, b = (t - sin t)/t^3 and a'/t, b'/t.
void jl_coefficients(double t, double& a, double& b, double& da, double& db) {
  if (t < 0.05) {
    const double t2 = t * t, t4 = t2 * t2;
    a = 0.5 - t2 / 24.0 + t4 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    da = -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0;
    db = -1.0 / 60.0 + t2 / 1260.0 - t4 / 60480.0;
  } else {
    const double s = std::sin(t), c = std::cos(t);
    const double t2 = t * t, t3 = t2 * t, t4 = t2 * t2, t5 = t4 * t;
    a = (1.0 - c) / t2;
    b = (t - s) / t3;
    da = (t * s - 2.0 * (1.0 - c)) / t4;
    db = ((1.0 - c) * t - 3.0 * (t - s)) / t5;
  }
}

// u = J_l(phi) t and K = du/dphi.
void jl_times(const Vec3& phi, const Vec3& t, Vec3& u, Mat3* K) {
  const double th = phi.norm();
  double a, b, da, db;
  jl_coefficients(th, a, b, da, db);
  const Vec3 pt = phi.cross(t);
  const Vec3 ppt = phi.cross(pt);
  u = t + a * pt + b * ppt;
  if (K) {
    *K = pt * (da * phi.transpose()) + ppt * (db * phi.transpose()) - a * skew(t) +
         b * (phi.dot(t) * Mat3::Identity() + phi * t.transpose() - 2.0 * t * phi.transpose());
  }
}

Vec3 moment_gradient(const Mat3& R, const Mat3& C) {
  const Mat3 X = R.transpose() * C;
  return Vec3(X(2, 1) - X(1, 2), X(0, 2) - X(2, 0), X(1, 0) - X(0, 1));
}

std::vector<int> clamped_nodes(const Skeleton& sk) {
  std::vector<int> roots;
  for (int e : sk.clamped) roots.push_back(sk.extremity_vertex(e));
  return roots;
}

}  // namespace

CenterlineResult reconstruct_centerline(const RotationField& R, const Skeleton& sk,
                                        const std::vector<std::pair<int, Vec3>>& anchors_in) {
  std::vector<std::pair<int, Vec3>> anchors = anchors_in;
  if (anchors.empty())
    for (int e : sk.clamped) anchors.emplace_back(sk.extremity_vertex(e), sk.extremities[e].position);
  if (anchors.empty()) throw DomainError("reconstruct_centerline: no anchor (no clamped extremity)");
  std::vector<int> roots;
  for (const auto& a : anchors) roots.push_back(a.first);
  const auto& mesh = R.mesh;
  const MeshTree tr = build_mesh_tree(mesh, roots);
  const int ni = mesh.interval_count();
  std::vector<Vec3> delta(ni);
  for (int g = 0; g < ni; ++g) {
    const int i = tr.interval_segment[g];
    const int a = tr.interval_start[g], b = tr.interval_end[g];
    const double h = mesh.s[i][g - mesh.interval_offset[i] + 1] - mesh.s[i][g - mesh.interval_offset[i]];
    Vec3 u;
    jl_times(log_so3(R.R[a].transpose() * R.R[b]), sk.segments[i].t, u, nullptr);
    delta[g] = h * R.R[a] * u;
  }
  CenterlineResult out;
  out.V.mesh = mesh;
  out.V.V.assign(mesh.node_count, Vec3::Zero());
  for (const auto& a : anchors) out.V.V[a.first] = a.second;
  for (int n : tr.order)
    if (tr.parent[n] >= 0) out.V.V[n] = out.V.V[tr.parent[n]] + tr.sign[n] * delta[tr.parent_interval[n]];
  for (int g : tr.chords) {
    const double r = (out.V.V[tr.interval_start[g]] + delta[g] - out.V.V[tr.interval_end[g]]).norm();
    out.closure.push_back(r);
    out.max_closure = std::max(out.max_closure, r);
  }
  return out;
}

struct Kappa2Problem::Eval {
  std::vector<Vec3> phi, u, delta, V, r;
};

Kappa2Problem::Kappa2Problem(const Skeleton& sk, const RodMesh& mesh, const Mat3& A, const LoadSet& loads)
    : sk_(sk), mesh_(mesh) {
  if (sk.clamped.empty()) throw DomainError("no clamped extremity: the kappa = 2 problem needs Gamma_0");
  tree_ = build_mesh_tree(mesh_, clamped_nodes(sk));
  lf_ = build_load_functional(sk, mesh_, loads);
  phi_ = reference_positions(sk, mesh_);
  fixed_.assign(mesh_.node_count, false);
  for (int r : clamped_nodes(sk)) fixed_[r] = true;
  for (const auto& seg : sk.segments) {
    Atilde_.push_back(seg.frame() * A * seg.frame().transpose());
    t_.push_back(seg.t);
  }
  multipliers.assign(tree_.chords.size(), Vec3::Zero());
}

Kappa2Problem::Eval Kappa2Problem::evaluate(const std::vector<Mat3>& R) const {
  Eval e;
  const int ni = mesh_.interval_count();
  e.phi.resize(ni);
  e.u.resize(ni);
  e.delta.resize(ni);
  for (int g = 0; g < ni; ++g) {
    const int i = tree_.interval_segment[g];
    const int k = g - mesh_.interval_offset[i];
    const int a = tree_.interval_start[g], b = tree_.interval_end[g];
    e.phi[g] = log_so3(R[a].transpose() * R[b]);
    jl_times(e.phi[g], t_[i], e.u[g], nullptr);
    e.delta[g] = mesh_.h(i, k) * R[a] * e.u[g];
  }
  e.V.assign(mesh_.node_count, Vec3::Zero());
  for (int n : tree_.order) {
    if (tree_.parent[n] < 0)
      e.V[n] = phi_[n];
    else
      e.V[n] = e.V[tree_.parent[n]] + tree_.sign[n] * e.delta[tree_.parent_interval[n]];
  }
  for (int g : tree_.chords) e.r.push_back(e.V[tree_.interval_start[g]] + e.delta[g] - e.V[tree_.interval_end[g]]);
  return e;
}

double Kappa2Problem::strain(const std::vector<Mat3>& R) const {
  double s = 0.0;
  for (int g = 0; g < mesh_.interval_count(); ++g) {
    const int i = tree_.interval_segment[g];
    const int k = g - mesh_.interval_offset[i];
    const Vec3 phi = log_so3(R[tree_.interval_start[g]].transpose() * R[tree_.interval_end[g]]);
    s += phi.dot(Atilde_[i] * phi) / mesh_.h(i, k);
  }
  return s;
}

double Kappa2Problem::load_value(const std::vector<Mat3>& R) const {
  const Eval e = evaluate(R);
  double L = 0.0;
  for (int n = 0; n < mesh_.node_count; ++n)
    L += lf_.cV[n].dot(e.V[n] - phi_[n]) + lf_.cR_node[n].cwiseProduct(R[n] - Mat3::Identity()).sum();
  return L;
}

double Kappa2Problem::value(const std::vector<Mat3>& R) const {
  const Eval e = evaluate(R);
  double v = 0.0;
  for (int g = 0; g < mesh_.interval_count(); ++g) {
    const int i = tree_.interval_segment[g];
    v += e.phi[g].dot(Atilde_[i] * e.phi[g]) / mesh_.h(i, g - mesh_.interval_offset[i]);
  }
  for (int n = 0; n < mesh_.node_count; ++n)
    v -= lf_.cV[n].dot(e.V[n] - phi_[n]) + lf_.cR_node[n].cwiseProduct(R[n] - Mat3::Identity()).sum();
  for (std::size_t c = 0; c < e.r.size(); ++c) v += multipliers[c].dot(e.r[c]) + 0.5 * penalty * e.r[c].squaredNorm();
  return v;
}

std::vector<Vec3> Kappa2Problem::gradient(const std::vector<Mat3>& R) const {
  const Eval e = evaluate(R);
  const int nn = mesh_.node_count;
  std::vector<Vec3> grad(nn, Vec3::Zero());

  // Sensitivity of the merit to each nodal position, then to each Delta.
  std::vector<Vec3> p(nn);
  for (int n = 0; n < nn; ++n) p[n] = -lf_.cV[n];
  std::vector<Vec3> nu(tree_.chords.size());
  for (std::size_t c = 0; c < tree_.chords.size(); ++c) {
    nu[c] = multipliers[c] + penalty * e.r[c];
    p[tree_.interval_start[tree_.chords[c]]] += nu[c];
    p[tree_.interval_end[tree_.chords[c]]] -= nu[c];
  }
  std::vector<Vec3> sub = p;
  for (auto it = tree_.order.rbegin(); it != tree_.order.rend(); ++it)
    if (tree_.parent[*it] >= 0) sub[tree_.parent[*it]] += sub[*it];
  std::vector<Vec3> gdelta(mesh_.interval_count(), Vec3::Zero());
  for (int n = 0; n < nn; ++n)
    if (tree_.parent[n] >= 0) gdelta[tree_.parent_interval[n]] = tree_.sign[n] * sub[n];
  for (std::size_t c = 0; c < tree_.chords.size(); ++c) gdelta[tree_.chords[c]] = nu[c];

  for (int g = 0; g < mesh_.interval_count(); ++g) {
    const int i = tree_.interval_segment[g];
    const double h = mesh_.h(i, g - mesh_.interval_offset[i]);
    const int a = tree_.interval_start[g], b = tree_.interval_end[g];
    const Vec3& phi = e.phi[g];
    const Mat3 JLi = jacobian_left_inv(phi), JRi = jacobian_right_inv(phi);
    Vec3 dphi = (2.0 / h) * (Atilde_[i] * phi);
    if (gdelta[g].squaredNorm() > 0.0) {
      Vec3 u;
      Mat3 K;
      jl_times(phi, t_[i], u, &K);
      const Vec3 q = R[a].transpose() * gdelta[g];
      grad[a] += h * u.cross(q);
      dphi += h * K.transpose() * q;
    }
    grad[a] -= JLi.transpose() * dphi;
    grad[b] += JRi.transpose() * dphi;
  }
  for (int n = 0; n < nn; ++n) {
    grad[n] -= moment_gradient(R[n], lf_.cR_node[n]);
    if (fixed_[n]) grad[n].setZero();
  }
  return grad;
}

std::vector<Vec3> Kappa2Problem::positions(const std::vector<Mat3>& R) const { return evaluate(R).V; }

std::vector<Vec3> Kappa2Problem::closure(const std::vector<Mat3>& R) const { return evaluate(R).r; }

namespace {

struct Newton {
  const Kappa2Problem& prob;
  std::vector<int> free;  // free node indices

  Eigen::VectorXd pack(const std::vector<Vec3>& g) const {
    Eigen::VectorXd x(3 * free.size());
    for (std::size_t k = 0; k < free.size(); ++k) x.segment<3>(3 * k) = g[free[k]];
    return x;
  }

  std::vector<Mat3> retract(const std::vector<Mat3>& R, const Eigen::VectorXd& xi) const {
    std::vector<Mat3> out = R;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const Mat3 Q = R[free[k]] * exp_so3(xi.segment<3>(3 * k));
      out[free[k]] = project_to_rotation(Q).R;
    }
    return out;
  }

  // Hessian of xi -> E(R exp(xi)) at xi = 0 by central differences of the
  // pulled-back gradient.
  Eigen::MatrixXd hessian(const std::vector<Mat3>& R) const {
    const int m = static_cast<int>(3 * free.size());
    Eigen::MatrixXd H(m, m);
    const double eps = 1e-5;
    std::vector<Mat3> Rp = R;
    for (int j = 0; j < m; ++j) {
      const int node = free[j / 3];
      Vec3 d = Vec3::Zero();
      d(j % 3) = eps;
      Rp[node] = R[node] * exp_so3(d);
      Eigen::VectorXd gp = pack(prob.gradient(Rp));
      gp.segment<3>(3 * (j / 3)) = jacobian_right(d).transpose() * gp.segment<3>(3 * (j / 3));
      Rp[node] = R[node] * exp_so3(-d);
      Eigen::VectorXd gm = pack(prob.gradient(Rp));
      gm.segment<3>(3 * (j / 3)) = jacobian_right(-d).transpose() * gm.segment<3>(3 * (j / 3));
      Rp[node] = R[node];
      H.col(j) = (gp - gm) / (2.0 * eps);
    }
    return 0.5 * (H + H.transpose());
  }
};

}  // namespace

Kappa2Solution minimize_kappa2(const Skeleton& sk, const Mat3& A, const LoadSet& loads, const SolveOptions& opts) {
  opts.validate();
  return minimize_kappa2(sk, A, loads, opts, make_rod_mesh(sk, opts.intervals_per_edge));
}

Kappa2Solution minimize_kappa2(const Skeleton& sk, const Mat3& A, const LoadSet& loads, const SolveOptions& opts,
                               const RodMesh& mesh) {
  opts.validate();
  if (sk.clamped.empty()) throw DomainError("no clamped extremity: the kappa = 2 problem needs Gamma_0");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (A + A.transpose()));
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw DomainError("solver: A is not positive definite");

  Kappa2Problem prob(sk, mesh, A, loads);
  double total_length = 0.0;
  for (const auto& s : sk.segments) total_length += s.length;
  prob.penalty = opts.penalty * eig.eigenvalues().maxCoeff() / std::pow(total_length, 3);

  Newton nt{prob, {}};
  for (int n = 0; n < mesh.node_count; ++n)
    if (!prob.fixed()[n]) nt.free.push_back(n);

  std::vector<Mat3> R(mesh.node_count, Mat3::Identity());
  SolveReport rep;
  rep.kappa = 2.0;
  bool inner_ok = true;
  bool stalled = false;
  double prev_closure = std::numeric_limits<double>::infinity();
  const bool has_cycles = !prob.tree().chords.empty();

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    rep.outer_iterations = outer + 1;
    inner_ok = false;
    double E = prob.value(R);
    for (int it = 0; it < opts.max_iterations; ++it) {
      const Eigen::VectorXd g = nt.pack(prob.gradient(R));
      rep.gradient_norm = g.norm();
      if (rep.gradient_norm <= opts.gradient_tolerance) {
        inner_ok = true;
        break;
      }
      const Eigen::MatrixXd H = nt.hessian(R);
      const int m = static_cast<int>(g.size());
      double tau = 0.0;
      const double hscale = std::max(1e-12, H.diagonal().cwiseAbs().maxCoeff());
      Eigen::VectorXd p;
      for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(H + tau * Eigen::MatrixXd::Identity(m, m));
        if (llt.info() == Eigen::Success) {
          p = -llt.solve(g);
          if (p.allFinite() && p.dot(g) < 0.0) break;
        }
        tau = tau == 0.0 ? 1e-10 * hscale : 4.0 * tau;
        p.resize(0);
      }
      if (p.size() == 0) p = -g;
      // Cap the rotation increment per node to stay inside the injectivity radius.
      double maxrot = 0.0;
      for (int k = 0; k < m / 3; ++k) maxrot = std::max(maxrot, p.segment<3>(3 * k).norm());
      if (maxrot > 1.0) p *= 1.0 / maxrot;
      const double slope = p.dot(g);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        std::vector<Mat3> Rt = nt.retract(R, alpha * p);
        const double Et = prob.value(Rt);
        if (Et <= E + 1e-4 * alpha * slope) {
          R = std::move(Rt);
          E = Et;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++rep.iterations;
      if (!accepted) {
        // No decrease representable at double precision: stationary to rounding.
        stalled = true;
        inner_ok = rep.gradient_norm <= 1e3 * opts.gradient_tolerance;
        break;
      }
      rep.trace.emplace_back(outer, E);
    }
    const auto r = prob.closure(R);
    double mc = 0.0;
    for (const auto& v : r) mc = std::max(mc, v.norm());
    rep.max_closure = mc;
    if (!has_cycles) break;
    if (mc <= opts.closure_tolerance && inner_ok) break;
    for (std::size_t c = 0; c < r.size(); ++c) prob.multipliers[c] += prob.penalty * r[c];
    if (mc > 0.25 * prev_closure) prob.penalty *= 10.0;
    prev_closure = mc;
  }

  rep.converged = inner_ok && rep.max_closure <= opts.closure_tolerance;
  if (!inner_ok) rep.flags.push_back(stalled ? "line search stalled" : "not converged within max_iterations");
  if (rep.max_closure > opts.closure_tolerance) rep.flags.push_back("cycle closure residual above tolerance");

  Kappa2Solution sol;
  sol.R = RotationField{mesh, R};
  sol.V.mesh = mesh;
  sol.V.V = prob.positions(R);
  const J2Value j = assemble_J2(sol.V, sol.R, A, loads, sk);
  rep.energy = j.total;
  rep.L = j.L;
  for (int i = 0; i < mesh.segment_count(); ++i) rep.gamma.push_back(gamma_strains(sol.R, sk, i));
  sol.report = std::move(rep);
  return sol;
}

Kappa1Solution minimize_kappa1(const Skeleton& sk, const LoadSet& loads, const SolveOptions& opts) {
  opts.validate();
  if (sk.clamped.empty()) throw DomainError("no clamped extremity: -L is unbounded without an anchor");
  const RodMesh mesh = make_rod_mesh(sk, opts.intervals_per_edge);
  const MeshTree tr = build_mesh_tree(mesh, clamped_nodes(sk));
  const LoadFunctional lf = build_load_functional(sk, mesh, loads);
  const auto S = rotation_samples(opts.sample_count);
  const int p = static_cast<int>(S.size());
  const int ni = mesh.interval_count();
  const int nn = mesh.node_count;

  std::vector<int> vvars;  // vertices carrying a moment
  for (int v = 0; v < sk.vertex_count(); ++v)
    if (lf.cM_vertex[v].cwiseAbs().maxCoeff() > 0.0) vvars.push_back(v);
  const int nblocks = ni + static_cast<int>(vvars.size());
  const int ncols = nblocks * p;
  const int nchord = static_cast<int>(tr.chords.size());
  const int nrows = nblocks + 3 * nchord;

  std::vector<Vec3> sub = lf.cV;
  for (auto it = tr.order.rbegin(); it != tr.order.rend(); ++it)
    if (tr.parent[*it] >= 0) sub[tr.parent[*it]] += sub[*it];
  // Downstream load and traversal sign per tree interval.
  std::vector<Vec3> down(ni, Vec3::Zero());
  std::vector<double> sgn(ni, 0.0);
  for (int n = 0; n < nn; ++n)
    if (tr.parent[n] >= 0) {
      down[tr.parent_interval[n]] = sub[n];
      sgn[tr.parent_interval[n]] = tr.sign[n];
    }
  auto hof = [&](int g) {
    const int i = tr.interval_segment[g];
    return mesh.h(i, g - mesh.interval_offset[i]);
  };

  Eigen::VectorXd c = Eigen::VectorXd::Zero(ncols);
  Eigen::MatrixXd Aeq = Eigen::MatrixXd::Zero(nrows, ncols);
  Eigen::VectorXd beq = Eigen::VectorXd::Zero(nrows);
  double constant = 0.0;
  for (int g = 0; g < ni; ++g) {
    const Vec3& t = sk.segments[tr.interval_segment[g]].t;
    const double h = hof(g);
    for (int k = 0; k < p; ++k) {
      c(g * p + k) = -sgn[g] * h * down[g].dot(S[k] * t) - lf.cR_interval[g].cwiseProduct(S[k]).sum();
      Aeq(g, g * p + k) = 1.0;
    }
    beq(g) = 1.0;
    constant += sgn[g] * h * down[g].dot(t) + lf.cR_interval[g].trace();
  }
  for (std::size_t q = 0; q < vvars.size(); ++q) {
    const int blk = ni + static_cast<int>(q);
    for (int k = 0; k < p; ++k) {
      c(blk * p + k) = -lf.cM_vertex[vvars[q]].cwiseProduct(S[k]).sum();
      Aeq(blk, blk * p + k) = 1.0;
    }
    beq(blk) = 1.0;
    constant += lf.cM_vertex[vvars[q]].trace();
  }
  // Closure rows: sum over the cycle of signed h (R t - t) vanishes.
  for (int q = 0; q < nchord; ++q) {
    const int g0 = tr.chords[q];
    std::map<int, double> coef;
    coef[g0] += 1.0;
    for (int n = tr.interval_start[g0]; tr.parent[n] >= 0; n = tr.parent[n]) coef[tr.parent_interval[n]] += tr.sign[n];
    for (int n = tr.interval_end[g0]; tr.parent[n] >= 0; n = tr.parent[n]) coef[tr.parent_interval[n]] -= tr.sign[n];
    Vec3 rhs = Vec3::Zero();
    for (const auto& [g, w] : coef) {
      if (w == 0.0) continue;
      const Vec3& t = sk.segments[tr.interval_segment[g]].t;
      const double h = hof(g);
      rhs += w * h * t;
      for (int k = 0; k < p; ++k) Aeq.block<3, 1>(nblocks + 3 * q, g * p + k) += w * h * (S[k] * t);
    }
    beq.segment<3>(nblocks + 3 * q) = rhs;
  }

  const LpResult lp = solve_lp(c, Aeq, beq);
  if (lp.status == LpResult::Status::Infeasible)
    throw DomainError("kappa in (1,2): closure constraints are infeasible over the rotation sample hull");
  if (lp.status == LpResult::Status::Unbounded)
    throw DomainError("kappa in (1,2): linear program unbounded (load set incompatible with clamping)");
  if (lp.status != LpResult::Status::Optimal) throw DomainError("kappa in (1,2): simplex iteration limit reached");

  Kappa1Solution sol;
  sol.R.mesh = mesh;
  auto certificate = [&](int blk) {
    std::vector<double> w;
    std::vector<Mat3> rots;
    double sum = 0.0;
    for (int k = 0; k < p; ++k) sum += lp.x(blk * p + k);
    for (int k = 0; k < p; ++k) {
      const double x = lp.x(blk * p + k);
      if (x > 0.0) {
        w.push_back(x / sum);
        rots.push_back(S[k]);
      }
    }
    return conv_combination(w, rots, 1e-9);
  };
  for (int g = 0; g < ni; ++g) sol.R.interval.push_back(certificate(g));
  sol.R.vertex.assign(sk.vertex_count(), conv_combination({1.0}, {Mat3::Identity()}));
  for (std::size_t q = 0; q < vvars.size(); ++q) sol.R.vertex[vvars[q]] = certificate(ni + static_cast<int>(q));

  const auto phi = reference_positions(sk, mesh);
  sol.V.mesh = mesh;
  sol.V.V.assign(nn, Vec3::Zero());
  for (int n : tr.order) {
    if (tr.parent[n] < 0) {
      sol.V.V[n] = phi[n];
    } else {
      const int g = tr.parent_interval[n];
      const Vec3& t = sk.segments[tr.interval_segment[g]].t;
      sol.V.V[n] = sol.V.V[tr.parent[n]] + tr.sign[n] * hof(g) * (sol.R.interval[g].M * t);
    }
  }

  SolveReport rep;
  rep.kappa = loads.kappa;
  rep.iterations = lp.iterations;
  rep.L = evaluate_L(sol.V, sol.R, loads, sk);
  rep.energy = -rep.L;
  rep.feasibility_residual = (Aeq * lp.x - beq).cwiseAbs().maxCoeff();
  for (int g : tr.chords) {
    const Vec3& t = sk.segments[tr.interval_segment[g]].t;
    const double r = (sol.V.V[tr.interval_start[g]] + hof(g) * (sol.R.interval[g].M * t) - sol.V.V[tr.interval_end[g]]).norm();
    rep.max_closure = std::max(rep.max_closure, r);
  }
  rep.converged = true;
  if (std::abs(rep.energy - (lp.value + constant)) > 1e-8 * std::max(1.0, std::abs(rep.energy)))
    rep.flags.push_back("objective mismatch between LP and evaluate_L");
  if (lp.redundant_rows > 0) rep.flags.push_back("redundant closure rows removed");
  sol.report = std::move(rep);
  return sol;
}

}  // namespace rodlimit
