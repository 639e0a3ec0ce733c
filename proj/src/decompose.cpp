#include "rodlimit/decompose.hpp"
#include "rodlimit/quadrature.hpp"
#include "rodlimit/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rodlimit {

CrossSectionGrid make_cross_section_grid(int radial, int angular) {
  if (radial < 2 || angular < 8 || angular % 2 != 0)
    throw DomainError("cross-section grid: need radial >= 2 and an even angular count >= 8");
  CrossSectionGrid g;
  g.radial = radial;
  g.angular = angular;
  const GaussRule rule = gauss_legendre(radial, 0.0, 1.0);
  g.r = rule.x;
  const double dth = 2.0 * std::numbers::pi / angular;
  for (int j = 0; j < angular; ++j) g.theta.push_back(j * dth);
  for (int i = 0; i < radial; ++i)
    for (int j = 0; j < angular; ++j) {
      g.Y.emplace_back(g.r[i] * std::cos(g.theta[j]), g.r[i] * std::sin(g.theta[j]));
      g.w.push_back(rule.w[i] * g.r[i] * dth);
    }
  // Lagrange differentiation on the radial nodes.
  std::vector<double> lam(radial, 1.0);
  for (int i = 0; i < radial; ++i)
    for (int k = 0; k < radial; ++k)
      if (k != i) lam[i] /= g.r[i] - g.r[k];
  g.Dr = Eigen::MatrixXd::Zero(radial, radial);
  for (int i = 0; i < radial; ++i) {
    for (int k = 0; k < radial; ++k)
      if (k != i) g.Dr(i, k) = (lam[k] / lam[i]) / (g.r[i] - g.r[k]);
    g.Dr(i, i) = -g.Dr.row(i).sum();
  }
  // Fourier differentiation on the periodic angular grid.
  g.Dth = Eigen::MatrixXd::Zero(angular, angular);
  for (int i = 0; i < angular; ++i)
    for (int k = 0; k < angular; ++k)
      if (k != i) {
        const int d = i - k;
        g.Dth(i, k) = 0.5 * ((d % 2 == 0) ? 1.0 : -1.0) / std::tan(d * dth / 2.0);
      }
  return g;
}

void GridSpec::validate() const {
  if (radial < 2 || angular < 8 || angular % 2 != 0)
    throw DomainError("grid: need radial >= 2 and an even angular count >= 8");
  if (!(near_factor > 0.0) || near_factor > 1.0) throw DomainError("grid: near_factor must be in (0, 1]");
  if (far_spacing < 0.0) throw DomainError("grid: far_spacing must be >= 0");
}

Vec3 RodFieldSamples::point(const Skeleton& sk, int segment, int k, int q) const {
  const auto& seg = sk.segments[segment];
  const Vec2& Y = grid.Y[q];
  return seg.point(rods[segment].s[k]) + delta * (Y(0) * seg.n + Y(1) * seg.b);
}

namespace {

std::vector<double> knot_arcs_on(const Skeleton& sk, int segment, std::vector<int>* knots = nullptr) {
  std::vector<double> arcs;
  for (const auto& [a, v] : sk.vertices_on(segment))
    if (sk.vertices[v].knot >= 0) {
      arcs.push_back(a);
      if (knots) knots->push_back(sk.vertices[v].knot);
    }
  return arcs;
}

// Three-point first-derivative weights at station k (one-sided at the ends).
std::array<std::pair<int, double>, 3> fd_weights(const std::vector<double>& s, int k) {
  const int n = static_cast<int>(s.size());
  if (n == 2) {
    const double h = s[1] - s[0];
    return {{{0, -1.0 / h}, {1, 1.0 / h}, {0, 0.0}}};
  }
  if (k == 0) {
    const double h1 = s[1] - s[0], h2 = s[2] - s[1];
    return {{{0, -(2 * h1 + h2) / (h1 * (h1 + h2))}, {1, (h1 + h2) / (h1 * h2)}, {2, -h1 / (h2 * (h1 + h2))}}};
  }
  if (k == n - 1) {
    const double h1 = s[n - 2] - s[n - 3], h2 = s[n - 1] - s[n - 2];
    return {{{n - 3, h2 / (h1 * (h1 + h2))}, {n - 2, -(h1 + h2) / (h1 * h2)}, {n - 1, (2 * h2 + h1) / (h2 * (h1 + h2))}}};
  }
  const double h1 = s[k] - s[k - 1], h2 = s[k + 1] - s[k];
  return {{{k - 1, -h2 / (h1 * (h1 + h2))}, {k, (h2 - h1) / (h1 * h2)}, {k + 1, h1 / (h2 * (h1 + h2))}}};
}

std::vector<double> trapezoid_weights(const std::vector<double>& s) {
  std::vector<double> w(s.size(), 0.0);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double h = s[k + 1] - s[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

double dist_to_so3(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F);
  Vec3 sv = svd.singularValues();
  if (F.determinant() < 0.0) sv(2) = -sv(2);
  return (sv - Vec3::Ones()).norm();
}

Vec3 section_offset(const Segment& seg, double delta, const Vec2& Y) { return delta * (Y(0) * seg.n + Y(1) * seg.b); }

}  // namespace

std::vector<std::vector<double>> station_layout(const Skeleton& sk, double delta, const GridSpec& spec) {
  spec.validate();
  if (!(delta > 0.0)) throw DomainError("grid: delta must be positive");
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& seg : sk.segments) lmin = std::min(lmin, seg.length);
  const double hfar = spec.far_spacing > 0.0 ? spec.far_spacing : lmin / 64.0;
  const double hnear = std::min(hfar, spec.near_factor * delta);
  const double reach = (sk.rho0 + 1.0) * delta;

  std::vector<std::vector<double>> out;
  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) {
    const double L = sk.segments[i].length;
    std::vector<double> varcs;
    for (const auto& [a, v] : sk.vertices_on(i)) varcs.push_back(a);
    auto spacing = [&](double s) {
      double d = std::numeric_limits<double>::infinity();
      for (double a : varcs) d = std::min(d, std::abs(s - a));
      return std::min(hfar, hnear + 0.5 * std::max(0.0, d - reach));
    };
    std::vector<double> mandatory = {0.0, L};
    for (double a : knot_arcs_on(sk, i))
      for (double off : {sk.rho0 * delta, reach})
        for (double sg : {-1.0, 1.0}) {
          const double b = a + sg * off;
          if (b > 0.0 && b < L) mandatory.push_back(b);
        }
    std::sort(mandatory.begin(), mandatory.end());
    std::vector<double> st = mandatory;
    for (double s = spacing(0.0); s < L; s += spacing(s)) {
      const double h = spacing(s);
      bool near = false;
      for (double m : mandatory) near = near || std::abs(s - m) < 0.3 * h;
      if (!near) st.push_back(s);
    }
    std::sort(st.begin(), st.end());
    st.erase(std::unique(st.begin(), st.end()), st.end());
    if (st.size() < 3) throw DomainError("grid: fewer than 3 stations on a segment");
    out.push_back(std::move(st));
  }
  return out;
}

RodFieldSamples sample_field(const Skeleton& sk, double delta, const GridSpec& spec, const FieldFunction& v) {
  RodFieldSamples out;
  out.delta = delta;
  out.grid = make_cross_section_grid(spec.radial, spec.angular);
  const auto layout = station_layout(sk, delta, spec);
  const int nq = out.grid.size();
  const double reach = (sk.rho0 + 1.0) * delta;
  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) {
    const auto& seg = sk.segments[i];
    RodSamples rs;
    rs.s = layout[i];
    const auto tw = trapezoid_weights(rs.s);
    std::vector<int> knots;
    const auto arcs = knot_arcs_on(sk, i, &knots);
    for (std::size_t k = 0; k < rs.s.size(); ++k) {
      const double s = rs.s[k];
      std::vector<int> rivals;  // lower-index rods sharing a nearby knot
      for (std::size_t m = 0; m < arcs.size(); ++m)
        if (std::abs(s - arcs[m]) <= reach + delta)
          for (const auto& inc : sk.knots[knots[m]].incidences)
            if (inc.segment < i) rivals.push_back(inc.segment);
      for (int q = 0; q < nq; ++q) {
        const Vec3 x = seg.point(s) + section_offset(seg, delta, out.grid.Y[q]);
        rs.v.push_back(v(i, s, x));
        bool owned = true;
        for (int j : rivals) owned = owned && !in_rod(sk, j, delta, x);
        rs.weight.push_back(owned ? tw[k] * delta * delta * out.grid.w[q] : 0.0);
      }
    }
    out.rods.push_back(std::move(rs));
  }
  for (int kn = 0; kn < static_cast<int>(sk.knots.size()); ++kn) {
    KnotCloud cloud;
    cloud.knot = kn;
    for (const auto& inc : sk.knots[kn].incidences) {
      const auto& rs = out.rods[inc.segment];
      const auto tw = trapezoid_weights(rs.s);
      for (std::size_t k = 0; k < rs.s.size(); ++k) {
        if (std::abs(rs.s[k] - inc.arc) > reach * (1.0 + 1e-12)) continue;
        for (int q = 0; q < nq; ++q) {
          cloud.x.push_back(out.point(sk, inc.segment, static_cast<int>(k), q));
          cloud.v.push_back(rs.v[k * nq + q]);
          cloud.w.push_back(tw[k] * delta * delta * out.grid.w[q]);
        }
      }
    }
    out.knots.push_back(std::move(cloud));
  }
  return out;
}

Vec3 eval_centerline(const CenterlineField& V, const RotationField& R, const Skeleton& sk, int segment, double s) {
  const auto& arcs = V.mesh.s[segment];
  const int n = static_cast<int>(arcs.size());
  int k = static_cast<int>(std::upper_bound(arcs.begin(), arcs.end(), s) - arcs.begin()) - 1;
  k = std::clamp(k, 0, n - 2);
  const double h = arcs[k + 1] - arcs[k];
  const double tau = (s - arcs[k]) / h;
  const Mat3& Ra = R.at(segment, k);
  const Vec3 phi = log_so3(Ra.transpose() * R.at(segment, k + 1));
  const Vec3& t = sk.segments[segment].t;
  const Vec3 full = h * Ra * jacobian_left(phi) * t;
  const Vec3 part = tau * h * Ra * jacobian_left(tau * phi) * t;
  const Vec3& Va = V.at(segment, k);
  const Vec3& Vb = V.at(segment, k + 1);
  return Va + part + tau * (Vb - Va - full);
}

std::pair<CenterlineField, RotationField> squeeze_to_junction_form(const CenterlineField& V, const RotationField& R,
                                                                   const Skeleton& sk, double delta) {
  const double c = sk.rho0 * delta;
  std::vector<std::vector<double>> arcs;
  std::vector<std::vector<Mat3>> rots;
  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) {
    const auto vo = sk.vertices_on(i);
    const auto& old = R.mesh.s[i];
    std::vector<double> sa;
    std::vector<Mat3> ra;
    for (std::size_t e = 0; e + 1 < vo.size(); ++e) {
      const double a0 = vo[e].first, a1 = vo[e + 1].first;
      const int v0 = vo[e].second, v1 = vo[e + 1].second;
      const double c0 = sk.vertices[v0].knot >= 0 ? c : 0.0;
      const double c1 = sk.vertices[v1].knot >= 0 ? c : 0.0;
      const double E = a1 - a0;
      if (c0 + c1 >= E) throw DomainError("squeeze: junction cores overlap on a segment edge; decrease delta");
      const Mat3& R0 = R.R[v0];
      const Mat3& R1 = R.R[v1];
      sa.push_back(a0);
      ra.push_back(R0);
      if (c0 > 0.0) {
        sa.push_back(a0 + c0);
        ra.push_back(R0);
      }
      for (std::size_t k = 0; k < old.size(); ++k)
        if (old[k] > a0 && old[k] < a1) {
          sa.push_back(a0 + c0 + (old[k] - a0) * (E - c0 - c1) / E);
          ra.push_back(R.at(i, static_cast<int>(k)));
        }
      if (c1 > 0.0) {
        sa.push_back(a1 - c1);
        ra.push_back(R1);
      }
    }
    sa.push_back(vo.back().first);
    ra.push_back(R.R[vo.back().second]);
    arcs.push_back(std::move(sa));
    rots.push_back(std::move(ra));
  }
  const RodMesh mesh = make_rod_mesh(sk, arcs);
  RotationField Rn{mesh, std::vector<Mat3>(mesh.node_count, Mat3::Identity())};
  for (int i = 0; i < mesh.segment_count(); ++i) {
    if (mesh.s[i].size() != rots[i].size()) throw std::logic_error("squeeze: mesh layout mismatch");
    for (std::size_t k = 0; k < rots[i].size(); ++k) Rn.R[mesh.node[i][k]] = rots[i][k];
  }
  std::vector<std::pair<int, Vec3>> anchors;
  for (int e : sk.clamped) anchors.emplace_back(sk.extremity_vertex(e), V.V[sk.extremity_vertex(e)]);
  if (anchors.empty()) anchors.emplace_back(0, V.V[0]);
  CenterlineResult cr = reconstruct_centerline(Rn, sk, anchors);
  return {std::move(cr.V), std::move(Rn)};
}

RodFieldSamples sample_elementary_deformation(const CenterlineField& V, const RotationField& R, const Skeleton& sk,
                                              double delta, const GridSpec& spec, double tol) {
  double scale = 1.0;
  for (const auto& seg : sk.segments) scale = std::max(scale, seg.length);
  const double core = sk.rho0 * delta;
  for (int kn = 0; kn < static_cast<int>(sk.knots.size()); ++kn) {
    const Mat3& RA = R.R[kn];
    const Vec3& VA = V.V[kn];
    for (const auto& inc : sk.knots[kn].incidences) {
      const auto& seg = sk.segments[inc.segment];
      for (double u : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const double s = inc.arc + u * core;
        if (s < 0.0 || s > seg.length) continue;
        const Mat3 Ri = R.eval(inc.segment, s);
        const Vec3 Vi = eval_centerline(V, R, sk, inc.segment, s);
        const double er = (Ri - RA).norm();
        const double ev = (Vi - VA - (s - inc.arc) * RA * seg.t).norm();
        if (er > tol || ev > tol * scale) {
          std::ostringstream os;
          os << "elementary deformation: fields violate the junction form at knot " << kn << " on segment "
             << inc.segment << " (rotation " << er << ", centerline " << ev << ")";
          throw DomainError(os.str());
        }
      }
    }
  }
  int ci = -1;
  double cs = std::numeric_limits<double>::quiet_NaN();
  Vec3 cV;
  Mat3 cR;
  FieldFunction f = [&](int i, double s, const Vec3& x) {
    if (i != ci || s != cs) {
      ci = i;
      cs = s;
      cR = R.eval(i, s);
      cV = eval_centerline(V, R, sk, i, s);
    }
    const auto& seg = sk.segments[i];
    return Vec3(cV + cR * (x - seg.point(s)));
  };
  return sample_field(sk, delta, spec, f);
}

std::vector<Mat3> rod_gradient(const RodFieldSamples& samples, const Skeleton& sk, int segment,
                               const std::vector<Vec3>& u) {
  const auto& g = samples.grid;
  const auto& s = samples.rods[segment].s;
  const auto& seg = sk.segments[segment];
  const int nq = g.size();
  const int ns = static_cast<int>(s.size());
  std::vector<Mat3> out(static_cast<std::size_t>(ns) * nq);
  for (int k = 0; k < ns; ++k) {
    const auto fw = fd_weights(s, k);
    for (int ir = 0; ir < g.radial; ++ir)
      for (int it = 0; it < g.angular; ++it) {
        const int q = ir * g.angular + it;
        Vec3 ds = Vec3::Zero(), dr = Vec3::Zero(), dth = Vec3::Zero();
        for (const auto& [m, w] : fw)
          if (w != 0.0) ds += w * u[static_cast<std::size_t>(m) * nq + q];
        for (int m = 0; m < g.radial; ++m) dr += g.Dr(ir, m) * u[static_cast<std::size_t>(k) * nq + m * g.angular + it];
        for (int m = 0; m < g.angular; ++m)
          dth += g.Dth(it, m) * u[static_cast<std::size_t>(k) * nq + ir * g.angular + m];
        const double c = std::cos(g.theta[it]), sn = std::sin(g.theta[it]), r = g.r[ir];
        const Vec3 dy2 = (c * dr - sn / r * dth) / samples.delta;
        const Vec3 dy3 = (sn * dr + c / r * dth) / samples.delta;
        out[static_cast<std::size_t>(k) * nq + q] = ds * seg.t.transpose() + dy2 * seg.n.transpose() + dy3 * seg.b.transpose();
      }
  }
  return out;
}

RodDecomposition decompose_rod(const RodFieldSamples& samples, const Skeleton& sk, int segment) {
  const auto& g = samples.grid;
  const auto& rs = samples.rods[segment];
  const auto& seg = sk.segments[segment];
  const int nq = g.size();
  const double delta = samples.delta;
  RodDecomposition out;
  double wsum = 0.0;
  for (double w : g.w) wsum += w;
  for (std::size_t k = 0; k < rs.s.size(); ++k) {
    Vec3 mean = Vec3::Zero();
    for (int q = 0; q < nq; ++q) mean += g.w[q] * rs.v[k * nq + q];
    mean /= wsum;
    Mat3 M = Mat3::Zero();
    for (int q = 0; q < nq; ++q) {
      const Vec3 y = g.Y[q](0) * seg.n + g.Y[q](1) * seg.b;
      M += g.w[q] * (rs.v[k * nq + q] - mean) * y.transpose();
    }
    M /= delta * wsum / 4.0;
    Eigen::JacobiSVD<Mat3> svd(M);
    const Projection p = project_to_rotation(M);
    if (p.nonunique || svd.singularValues()(1) < 1e-8) out.flagged.push_back(static_cast<int>(k));
    out.V.push_back(mean);
    out.R.push_back(p.R);
    for (int q = 0; q < nq; ++q)
      out.vbar.push_back(rs.v[k * nq + q] - mean - p.R * section_offset(seg, delta, g.Y[q]));
  }
  return out;
}

RigidFit junction_rigid_fit(const std::vector<Vec3>& x, const std::vector<Vec3>& v, const std::vector<double>& w,
                            const Vec3& A) {
  if (x.size() != v.size() || x.size() != w.size()) throw DomainError("rigid fit: size mismatch");
  RigidFit fit;
  double W = 0.0;
  Vec3 xc = Vec3::Zero(), vc = Vec3::Zero();
  for (std::size_t j = 0; j < x.size(); ++j) {
    W += w[j];
    xc += w[j] * x[j];
    vc += w[j] * v[j];
  }
  if (x.size() < 4 || !(W > 0.0)) {
    fit.flagged = true;
    fit.a = x.empty() ? A : vc / std::max(W, 1e-300);
    return fit;
  }
  xc /= W;
  vc /= W;
  Mat3 H = Mat3::Zero(), C = Mat3::Zero();
  for (std::size_t j = 0; j < x.size(); ++j) {
    H += w[j] * (v[j] - vc) * (x[j] - xc).transpose();
    C += w[j] * (x[j] - xc) * (x[j] - xc).transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(C);
  if (eig.eigenvalues()(0) <= 1e-10 * eig.eigenvalues()(2)) fit.flagged = true;
  const Projection p = project_to_rotation(H);
  fit.flagged = fit.flagged || p.nonunique;
  fit.R = p.R;
  fit.a = vc - fit.R * (xc - A);
  return fit;
}

DecompositionResult blend_structure_decomposition(const RodFieldSamples& samples,
                                                  const std::vector<RodDecomposition>& rods,
                                                  const std::vector<RigidFit>& junctions, const Skeleton& sk) {
  const double delta = samples.delta;
  const double core = sk.rho0 * delta;
  const double reach = (sk.rho0 + 1.0) * delta;
  const auto& g = samples.grid;
  const int nq = g.size();
  if (junctions.size() != sk.knots.size()) throw DomainError("blend: one rigid fit per knot is required");
  DecompositionResult out;
  NormTable& nt = out.norms;
  double vb2 = 0.0, gvb2 = 0.0, dr2 = 0.0, dv2 = 0.0, dist2 = 0.0, korn2 = 0.0;

  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) {
    const auto& seg = sk.segments[i];
    const auto& rs = samples.rods[i];
    const auto& rd = rods[i];
    const int ns = static_cast<int>(rs.s.size());
    std::vector<int> knots;
    const auto arcs = knot_arcs_on(sk, i, &knots);
    for (std::size_t m = 0; m < arcs.size(); ++m)
      for (double sg : {-1.0, 1.0}) {
        const double lo = arcs[m] + sg * core, hi = arcs[m] + sg * reach;
        if (std::min(lo, hi) < -1e-12 || std::max(lo, hi) > seg.length + 1e-12) continue;
        int inside = 0;
        for (double s : rs.s) inside += (s > std::min(lo, hi) && s < std::max(lo, hi)) ? 1 : 0;
        if (inside < 2) {
          std::ostringstream os;
          os << "blend: station grid too coarse to resolve the blending interval at knot " << knots[m] << " on segment "
             << i;
          throw DomainError(os.str());
        }
      }
    auto station_of = [&](double s) {
      int best = 0;
      for (int k = 1; k < ns; ++k)
        if (std::abs(rs.s[k] - s) < std::abs(rs.s[best] - s)) best = k;
      if (std::abs(rs.s[best] - s) > 1e-9 * std::max(1.0, seg.length))
        throw DomainError("blend: station grid lacks the blending breakpoints");
      return best;
    };

    std::vector<Vec3> V(ns);
    std::vector<Mat3> R(ns);
    for (int k = 0; k < ns; ++k) {
      const double s = rs.s[k];
      int m = -1;
      for (std::size_t j = 0; j < arcs.size(); ++j)
        if (m < 0 || std::abs(s - arcs[j]) < std::abs(s - arcs[m])) m = static_cast<int>(j);
      const double d = m < 0 ? std::numeric_limits<double>::infinity() : std::abs(s - arcs[m]);
      if (d <= core * (1.0 + 1e-12)) {
        const RigidFit& J = junctions[knots[m]];
        R[k] = J.R;
        V[k] = J.a + (s - arcs[m]) * J.R * seg.t;
      } else if (d < reach * (1.0 - 1e-12)) {
        const RigidFit& J = junctions[knots[m]];
        const double w = (d - core) / delta;
        const double so = arcs[m] + (s > arcs[m] ? reach : -reach);
        R[k] = geodesic_interpolate(J.R, rd.R[station_of(so)], w).R;
        V[k] = w * rd.V[k] + (1.0 - w) * (J.a + (s - arcs[m]) * J.R * seg.t);
      } else {
        R[k] = rd.R[k];
        V[k] = rd.V[k];
      }
    }

    std::vector<Vec3> vbar(rs.v.size());
    for (int k = 0; k < ns; ++k)
      for (int q = 0; q < nq; ++q) {
        const std::size_t j = static_cast<std::size_t>(k) * nq + q;
        const Vec3 ve = V[k] + R[k] * section_offset(seg, delta, g.Y[q]);
        vbar[j] = rs.v[j] - ve;
        out.reconstruction_error = std::max(out.reconstruction_error, (rs.v[j] - (ve + vbar[j])).norm());
      }

    const auto gv = rod_gradient(samples, sk, i, rs.v);
    const auto gb = rod_gradient(samples, sk, i, vbar);
    for (int k = 0; k < ns; ++k)
      for (int q = 0; q < nq; ++q) {
        const std::size_t j = static_cast<std::size_t>(k) * nq + q;
        const double w = rs.weight[j];
        if (w == 0.0) continue;
        const Vec3 x = seg.point(rs.s[k]) + section_offset(seg, delta, g.Y[q]);
        vb2 += w * vbar[j].squaredNorm();
        gvb2 += w * gb[j].squaredNorm();
        const double dd = dist_to_so3(gv[j]);
        dist2 += w * dd * dd;
        korn2 += w * ((rs.v[j] - x).squaredNorm() + (gv[j] - Mat3::Identity()).squaredNorm());
      }
    const auto tw = trapezoid_weights(rs.s);
    for (int k = 0; k < ns; ++k) {
      Mat3 dR = Mat3::Zero();
      Vec3 dV = Vec3::Zero();
      for (const auto& [m, w] : fd_weights(rs.s, k)) {
        dR += w * R[m];
        dV += w * V[m];
      }
      dr2 += tw[k] * dR.squaredNorm();
      dv2 += tw[k] * (dV - R[k] * seg.t).squaredNorm();
    }
    for (int k : rd.flagged) {
      std::ostringstream os;
      os << "segment " << i << " station " << k << ": degenerate section moment";
      out.flags.push_back(os.str());
    }
    out.V.push_back(std::move(V));
    out.R.push_back(std::move(R));
    out.vbar.push_back(std::move(vbar));
  }
  for (std::size_t kn = 0; kn < junctions.size(); ++kn)
    if (junctions[kn].flagged) out.flags.push_back("knot " + std::to_string(kn) + ": degenerate rigid fit");
  nt.vbar_L2 = std::sqrt(vb2);
  nt.grad_vbar_L2 = std::sqrt(gvb2);
  nt.dR_ds_L2 = std::sqrt(dr2);
  nt.dV_ds_L2 = std::sqrt(dv2);
  nt.dist_L2 = std::sqrt(dist2);
  nt.korn_H1 = std::sqrt(korn2);
  return out;
}

DecompositionResult decompose_structure(const RodFieldSamples& samples, const Skeleton& sk) {
  std::vector<RodDecomposition> rods;
  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) rods.push_back(decompose_rod(samples, sk, i));
  std::vector<RigidFit> fits;
  for (std::size_t kn = 0; kn < sk.knots.size(); ++kn) {
    const auto& c = samples.knots[kn];
    fits.push_back(junction_rigid_fit(c.x, c.v, c.w, sk.knots[kn].position));
  }
  return blend_structure_decomposition(samples, rods, fits, sk);
}

Energy3D evaluate_3d_energy(const RodFieldSamples& samples, const Skeleton& sk, const SvkMaterial& mat,
                            const LoadSet& loads) {
  mat.validate();
  loads.validate(sk);
  const double delta = samples.delta;
  const double kp = loads.kappa_prime();
  const double core = sk.rho0 * delta;
  const auto& g = samples.grid;
  const int nq = g.size();
  Energy3D out;
  double dist2 = 0.0;

  for (int i = 0; i < static_cast<int>(sk.segments.size()); ++i) {
    const auto& seg = sk.segments[i];
    const auto& rs = samples.rods[i];
    const auto grad = rod_gradient(samples, sk, i, rs.v);
    const auto arcs = knot_arcs_on(sk, i);
    const bool has_table = !loads.segments.empty() && !loads.segments[i].empty();
    for (std::size_t k = 0; k < rs.s.size(); ++k) {
      const double s = rs.s[k];
      bool in_core = false;
      for (double a : arcs) in_core = in_core || std::abs(s - a) < core;
      for (int q = 0; q < nq; ++q) {
        const std::size_t j = k * nq + q;
        const double w = rs.weight[j];
        if (w == 0.0) continue;
        const double W = svk_density(grad[j], mat);
        if (!std::isfinite(W)) {
          if (!out.infinite) {
            std::ostringstream os;
            os << "segment " << i << " station " << k << " (s = " << s << ") section sample " << q;
            out.location = os.str();
          }
          out.infinite = true;
          continue;
        }
        out.elastic += w * W;
        const double dd = dist_to_so3(grad[j]);
        dist2 += w * dd * dd;
        if (has_table && !in_core) {
          const auto& tab = loads.segments[i];
          const double y2 = delta * g.Y[q](0), y3 = delta * g.Y[q](1);
          const Vec3 f = std::pow(delta, kp) * tab.f_at(s) + std::pow(delta, kp - 2.0) * (y2 * tab.gn_at(s) + y3 * tab.gb_at(s));
          const Vec3 x = seg.point(s) + section_offset(seg, delta, g.Y[q]);
          out.work += w * f.dot(rs.v[j] - x);
        }
      }
    }
  }

  for (const auto& nl : loads.nodes) {
    const auto& vert = sk.vertices[nl.vertex];
    const Vec3& A = vert.position;
    struct Pt {
      Vec3 z, u;
      double w;
    };
    std::vector<Pt> pts;
    for (const auto& inc : vert.incidences) {
      const auto& seg = sk.segments[inc.segment];
      const auto& rs = samples.rods[inc.segment];
      for (std::size_t k = 0; k < rs.s.size(); ++k) {
        if (std::abs(rs.s[k] - inc.arc) > core * (1.0 + 1e-12)) continue;
        for (int q = 0; q < nq; ++q) {
          const std::size_t j = k * nq + q;
          if (rs.weight[j] == 0.0) continue;
          const Vec3 x = seg.point(rs.s[k]) + section_offset(seg, delta, g.Y[q]);
          pts.push_back({A + (x - A) / delta, rs.v[j] - x, rs.weight[j] / (delta * delta * delta)});
        }
      }
    }
    double vol = 0.0;
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) {
      vol += p.w;
      c += p.w * p.z;
    }
    if (!(vol > 0.0)) throw DomainError("3D energy: empty core region at a loaded vertex");
    c /= vol;
    Mat3 K = Mat3::Zero();
    for (const auto& p : pts) K += p.w * (p.z - c) * (p.z - c).transpose();
    const Mat3 G = nl.M * K.inverse();
    const Vec3 F = nl.Phi / vol;
    for (const auto& p : pts) {
      const Vec3 f = std::pow(delta, kp - 1.0) * F + std::pow(delta, kp - 2.0) * (G * (p.z - c));
      out.work += p.w * delta * delta * delta * f.dot(p.u);
    }
  }

  out.dist_L2 = std::sqrt(dist2);
  out.J = out.infinite ? kInfiniteEnergy : out.elastic - out.work;
  out.scaled = out.J / std::pow(delta, 2.0 * loads.kappa);
  return out;
}

Family parse_family(const std::string& name) {
  if (name == "rigid") return Family::Rigid;
  if (name == "twist") return Family::Twist;
  if (name == "bend") return Family::Bend;
  if (name == "mixed") return Family::Mixed;
  throw DomainError("unknown family '" + name + "' (expected rigid, twist, bend or mixed)");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Rigid: return "rigid";
    case Family::Twist: return "twist";
    case Family::Bend: return "bend";
    case Family::Mixed: return "mixed";
  }
  return "unknown";
}

Skeleton family_skeleton(const FamilySpec& spec) {
  if (!(spec.length > 0.0)) throw DomainError("family: length must be positive");
  return build_skeleton({SegmentSpec::from_endpoints(Vec3::Zero(), spec.length * Vec3::UnitX())}, {EndId{0, false}});
}

FieldFunction family_field(const FamilySpec& spec, double delta) {
  if (!(delta > 0.0)) throw DomainError("family: delta must be positive");
  if (spec.kappa < 1.0) throw DomainError("family: kappa must be >= 1");
  const Vec3 t = Vec3::UnitX(), n = Vec3::UnitY(), b = Vec3::UnitZ();
  Vec3 axis = Vec3::Zero();
  switch (spec.family) {
    case Family::Rigid: return [](int, double, const Vec3& x) { return x; };
    case Family::Twist: axis = t; break;
    case Family::Bend: axis = n; break;
    case Family::Mixed: axis = (t + n + b).normalized(); break;
  }
  const double c = spec.amplitude;
  const Vec3 omega = c * std::pow(delta, spec.kappa - 2.0) * axis;
  const double eps = c * std::pow(delta, spec.kappa - 1.0);
  const double warp = c * std::pow(delta, spec.kappa);
  const double L = spec.length;
  return [=](int, double s, const Vec3& x) {
    const Mat3 R = exp_so3(s * omega);
    const Vec3 V = (1.0 + eps) * s * (jacobian_left(s * omega) * t);
    const Vec3 y = x - s * t;
    const double Y2 = y.dot(n) / delta, Y3 = y.dot(b) / delta;
    const Vec3 w = (Y2 * Y2 + Y3 * Y3 - 0.5) * t + (Y2 * Y2 - Y3 * Y3) * n + (2.0 * Y2 * Y3) * b;
    return Vec3(V + R * y + warp * (s / L) * (R * w));
  };
}

ScalingReport scaling_study(const FamilySpec& spec, const std::vector<double>& deltas, const GridSpec& grid,
                            double tolerance) {
  if (deltas.size() < 3) throw DomainError("scaling study: at least 3 delta values are required");
  for (double d : deltas)
    if (!(d > 0.0) || d >= spec.length / 4.0) throw DomainError("scaling study: delta values must lie in (0, L/4)");
  ScalingReport rep;
  rep.family = spec;
  rep.deltas = deltas;
  const Skeleton sk = family_skeleton(spec);
  const double k = spec.kappa;
  const std::pair<const char*, double> predicted[] = {{"vbar_L2", k + 1.0}, {"grad_vbar_L2", k},
                                                      {"dR_ds_L2", k - 2.0}, {"dV_ds_L2", k - 1.0},
                                                      {"korn_H1", k - 1.0},  {"dist_L2", k}};
  for (const auto& [name, p] : predicted) {
    SlopeEntry e;
    e.quantity = name;
    e.predicted = p;
    rep.entries.push_back(e);
  }
  for (double d : deltas) {
    const RodFieldSamples smp = sample_field(sk, d, grid, family_field(spec, d));
    const NormTable nt = decompose_structure(smp, sk).norms;
    const double vals[] = {nt.vbar_L2, nt.grad_vbar_L2, nt.dR_ds_L2, nt.dV_ds_L2, nt.korn_H1, nt.dist_L2};
    for (std::size_t e = 0; e < rep.entries.size(); ++e) rep.entries[e].values.push_back(vals[e]);
  }
  rep.all_pass = true;
  for (auto& e : rep.entries) {
    const double vmax = *std::max_element(e.values.begin(), e.values.end());
    if (vmax <= 1e-10) {
      e.degenerate = true;
      e.pass = true;
      e.slope = 0.0;
      continue;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(deltas.size());
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const double x = std::log(deltas[j]), y = std::log(std::max(e.values[j], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    e.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    e.pass = std::abs(e.slope - e.predicted) <= tolerance;
    rep.all_pass = rep.all_pass && e.pass;
  }
  return rep;
}

}  // namespace rodlimit
