#include "rodlimit/fields.hpp"
#include "rodlimit/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace rodlimit {

GaussRule gauss_legendre(int n, double a, double b) {
  // Golub-Welsch.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  GaussRule r;
  for (int k = 0; k < n; ++k) {
    const double x = eig.eigenvalues()(k);
    const double v = eig.eigenvectors()(0, k);
    r.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * x);
    r.w.push_back((b - a) * v * v);
  }
  return r;
}

namespace {

RodMesh finish(const Skeleton& sk, std::vector<std::vector<double>> arcs) {
  RodMesh m;
  const int N = static_cast<int>(sk.segments.size());
  m.vertex_count = sk.vertex_count();
  m.node_count = m.vertex_count;
  m.s.resize(N);
  m.node.resize(N);
  m.interval_offset.assign(N + 1, 0);
  for (int i = 0; i < N; ++i) {
    const double L = sk.segments[i].length;
    const auto verts = sk.vertices_on(i);
    std::vector<double> a = arcs[i];
    for (const auto& [arc, v] : verts) a.push_back(arc);
    std::sort(a.begin(), a.end());
    if (a.front() < -sk.tolerance || a.back() > L + sk.tolerance)
      throw DomainError("rod mesh: arc-length outside the segment");
    std::vector<double> merged;
    for (double x : a) {
      x = std::clamp(x, 0.0, L);
      if (merged.empty() || x - merged.back() > sk.tolerance) merged.push_back(x);
    }
    // Snap to exact vertex arcs.
    for (const auto& [arc, v] : verts)
      for (double& x : merged)
        if (std::abs(x - arc) <= sk.tolerance) x = arc;
    m.s[i] = merged;
    m.node[i].assign(merged.size(), -1);
    for (std::size_t k = 0; k < merged.size(); ++k) {
      for (const auto& [arc, v] : verts)
        if (merged[k] == arc) m.node[i][k] = v;
      if (m.node[i][k] < 0) m.node[i][k] = m.node_count++;
    }
    if (merged.size() < 2) throw DomainError("rod mesh: segment without intervals");
    m.interval_offset[i + 1] = m.interval_offset[i] + static_cast<int>(merged.size()) - 1;
  }
  return m;
}

}  // namespace

RodMesh make_rod_mesh(const Skeleton& sk, int per_edge) {
  if (per_edge < 1) throw DomainError("rod mesh: need at least one interval per edge");
  std::vector<std::vector<double>> arcs(sk.segments.size());
  for (std::size_t i = 0; i < sk.segments.size(); ++i) {
    const auto verts = sk.vertices_on(static_cast<int>(i));
    for (std::size_t e = 0; e + 1 < verts.size(); ++e) {
      const double a = verts[e].first, b = verts[e + 1].first;
      for (int k = 1; k < per_edge; ++k) arcs[i].push_back(a + (b - a) * k / per_edge);
    }
  }
  return finish(sk, arcs);
}

RodMesh make_rod_mesh(const Skeleton& sk, const std::vector<std::vector<double>>& arcs) {
  if (arcs.size() != sk.segments.size()) throw DomainError("rod mesh: one arc list per segment required");
  return finish(sk, arcs);
}

std::vector<Vec3> reference_positions(const Skeleton& sk, const RodMesh& mesh) {
  std::vector<Vec3> phi(mesh.node_count, Vec3::Zero());
  for (int i = 0; i < mesh.segment_count(); ++i)
    for (std::size_t k = 0; k < mesh.s[i].size(); ++k) phi[mesh.node[i][k]] = sk.segments[i].point(mesh.s[i][k]);
  for (int v = 0; v < sk.vertex_count(); ++v) phi[v] = sk.vertices[v].position;
  return phi;
}

Mat3 RotationField::eval(int segment, double s) const {
  const auto& a = mesh.s[segment];
  auto it = std::upper_bound(a.begin(), a.end(), s);
  int k = static_cast<int>(it - a.begin()) - 1;
  k = std::clamp(k, 0, static_cast<int>(a.size()) - 2);
  const double tau = std::clamp((s - a[k]) / (a[k + 1] - a[k]), 0.0, 1.0);
  return geodesic_interpolate(at(segment, k), at(segment, k + 1), tau).R;
}

}  // namespace rodlimit
