#include "rodlimit/loads.hpp"
#include "rodlimit/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace rodlimit {

Vec3 LoadTable::interp(const std::vector<Vec3>& v, double x) const {
  if (s.empty()) return Vec3::Zero();
  if (x <= s.front()) return v.front();
  if (x >= s.back()) return v.back();
  const auto it = std::upper_bound(s.begin(), s.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - s.begin()) - 1;
  const double tau = (x - s[k]) / (s[k + 1] - s[k]);
  return (1.0 - tau) * v[k] + tau * v[k + 1];
}

void LoadSet::validate(const Skeleton& sk) const {
  if (!(kappa >= 1.0)) throw DomainError("loads: kappa must be >= 1");
  if (!segments.empty() && segments.size() != sk.segments.size())
    throw DomainError("loads: one table per segment required");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& t = segments[i];
    if (t.f.size() != t.s.size() || t.gn.size() != t.s.size() || t.gb.size() != t.s.size())
      throw DomainError("loads: table of segment " + std::to_string(i) + " has inconsistent columns");
    for (std::size_t k = 1; k < t.s.size(); ++k)
      if (!(t.s[k] > t.s[k - 1])) throw DomainError("loads: table arc-lengths must increase");
  }
  for (const auto& n : nodes)
    if (n.vertex < 0 || n.vertex >= sk.vertex_count()) throw DomainError("loads: node load references unknown vertex");
}

JunctionQuadrature junction_quadrature(const Skeleton& sk, int knot, int ns, int nr, int nth) {
  const auto& kn = sk.knots.at(knot);
  const double rho = sk.rho0;
  JunctionQuadrature q;
  const GaussRule gr = gauss_legendre(nr, 0.0, 1.0);
  for (const auto& in : kn.incidences) {
    const auto& seg = sk.segments[in.segment];
    const double lo = in.arc == 0.0 ? 0.0 : -rho;
    const double hi = in.arc == seg.length ? 0.0 : rho;
    const GaussRule gu = gauss_legendre(ns, lo, hi);
    for (std::size_t a = 0; a < gu.x.size(); ++a)
      for (std::size_t b = 0; b < gr.x.size(); ++b)
        for (int c = 0; c < nth; ++c) {
          const double th = 2.0 * M_PI * (c + 0.5) / nth;
          const double r = gr.x[b];
          const Vec3 y = kn.position + gu.x[a] * seg.t + r * (std::cos(th) * seg.n + std::sin(th) * seg.b);
          bool owned = false;
          for (const auto& other : kn.incidences) {
            if (other.segment >= in.segment) break;
            const auto& os = sk.segments[other.segment];
            const Vec3 d = y - kn.position;
            const double u = d.dot(os.t);
            const double olo = other.arc == 0.0 ? 0.0 : -rho;
            const double ohi = other.arc == os.length ? 0.0 : rho;
            if (u >= olo && u <= ohi && (d - u * os.t).norm() < 1.0) owned = true;
          }
          if (owned) continue;
          q.points.push_back(y);
          q.weights.push_back(gu.w[a] * gr.w[b] * r * 2.0 * M_PI / nth);
          q.segment.push_back(in.segment);
        }
  }
  return q;
}

ReducedJunctionLoad reduce_junction_loads(const JunctionQuadrature& quad, const std::vector<Vec3>& F,
                                          const std::vector<Vec3>& G, const Vec3& A, double tol) {
  const std::size_t n = quad.points.size();
  if (F.size() != n || G.size() != n) throw DomainError("junction loads: sample count mismatch");
  ReducedJunctionLoad out{Vec3::Zero(), Mat3::Zero()};
  Vec3 meanG = Vec3::Zero();
  double absG = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = quad.weights[k];
    out.Phi += w * F[k];
    meanG += w * G[k];
    absG += w * G[k].norm();
    out.M += w * G[k] * (quad.points[k] - A).transpose();
  }
  if (meanG.norm() > tol * std::max(absG, 1e-300) && meanG.norm() > 1e-300)
    throw DomainError("junction loads: G_A does not have zero mean");
  return out;
}

LoadFunctional build_load_functional(const Skeleton& sk, const RodMesh& mesh, const LoadSet& loads) {
  loads.validate(sk);
  LoadFunctional lf;
  lf.cV.assign(mesh.node_count, Vec3::Zero());
  lf.cR_node.assign(mesh.node_count, Mat3::Zero());
  lf.cR_interval.assign(mesh.interval_count(), Mat3::Zero());
  lf.cM_vertex.assign(mesh.vertex_count, Mat3::Zero());
  if (!loads.segments.empty()) {
    for (int i = 0; i < mesh.segment_count(); ++i) {
      const auto& tab = loads.segments[i];
      if (tab.empty()) continue;
      const auto& seg = sk.segments[i];
      for (int k = 0; k < mesh.intervals_on(i); ++k) {
        const double h = mesh.h(i, k);
        const double s0 = mesh.s[i][k], s1 = mesh.s[i][k + 1];
        const int n0 = mesh.node[i][k], n1 = mesh.node[i][k + 1];
        const double w = M_PI * 0.5 * h;
        lf.cV[n0] += w * tab.f_at(s0);
        lf.cV[n1] += w * tab.f_at(s1);
        const Mat3 r0 = (w / 3.0) * (tab.gn_at(s0) * seg.n.transpose() + tab.gb_at(s0) * seg.b.transpose());
        const Mat3 r1 = (w / 3.0) * (tab.gn_at(s1) * seg.n.transpose() + tab.gb_at(s1) * seg.b.transpose());
        lf.cR_node[n0] += r0;
        lf.cR_node[n1] += r1;
        lf.cR_interval[mesh.interval_offset[i] + k] += r0 + r1;
      }
    }
  }
  for (const auto& nl : loads.nodes) {
    lf.cV[nl.vertex] += nl.Phi;
    lf.cR_node[nl.vertex] += nl.M;
    lf.cM_vertex[nl.vertex] += nl.M;
  }
  return lf;
}

namespace {

void check_mesh(const RodMesh& a, const RodMesh& b, const Skeleton& sk) {
  if (a.node_count != b.node_count || a.s != b.s || a.vertex_count != sk.vertex_count())
    throw DomainError("evaluate_L: fields are not sampled on a common mesh with knot values");
}

}  // namespace

double evaluate_L(const CenterlineField& V, const RotationField& R, const LoadSet& loads, const Skeleton& sk) {
  check_mesh(V.mesh, R.mesh, sk);
  if (V.V.size() != static_cast<std::size_t>(V.mesh.node_count) || R.R.size() != V.V.size())
    throw DomainError("evaluate_L: missing nodal values");
  const LoadFunctional lf = build_load_functional(sk, V.mesh, loads);
  const auto phi = reference_positions(sk, V.mesh);
  double L = 0.0;
  for (int n = 0; n < V.mesh.node_count; ++n)
    L += lf.cV[n].dot(V.V[n] - phi[n]) + (lf.cR_node[n].cwiseProduct(R.R[n] - Mat3::Identity())).sum();
  return L;
}

double evaluate_L(const CenterlineField& V, const ConvexRotationField& R, const LoadSet& loads,
                  const Skeleton& sk) {
  check_mesh(V.mesh, R.mesh, sk);
  if (R.interval.size() != static_cast<std::size_t>(R.mesh.interval_count()) ||
      R.vertex.size() != static_cast<std::size_t>(sk.vertex_count()))
    throw DomainError("evaluate_L: missing interval or knot values");
  const LoadFunctional lf = build_load_functional(sk, V.mesh, loads);
  const auto phi = reference_positions(sk, V.mesh);
  double L = 0.0;
  for (int n = 0; n < V.mesh.node_count; ++n) L += lf.cV[n].dot(V.V[n] - phi[n]);
  for (int k = 0; k < V.mesh.interval_count(); ++k)
    L += (lf.cR_interval[k].cwiseProduct(R.interval[k].M - Mat3::Identity())).sum();
  for (int v = 0; v < sk.vertex_count(); ++v)
    L += (lf.cM_vertex[v].cwiseProduct(R.vertex[v].M - Mat3::Identity())).sum();
  return L;
}

}  // namespace rodlimit
