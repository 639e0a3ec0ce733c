#include "rodlimit/cross_section.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iterator>

namespace rodlimit {

namespace {

int ring_offset(int j) { return j == 0 ? 0 : 1 + 6 * j * (j - 1); }

using Bmat = Eigen::Matrix<double, 6, 9>;

Bmat strain_operator(const std::array<Vec2, 3>& g) {
  Bmat B = Bmat::Zero();
  for (int a = 0; a < 3; ++a) {
    const double g2 = g[a].x(), g3 = g[a].y();
    B(1, 3 * a) = 0.5 * g2;
    B(2, 3 * a) = 0.5 * g3;
    B(3, 3 * a + 1) = g2;
    B(4, 3 * a + 1) = 0.5 * g3;
    B(4, 3 * a + 2) = 0.5 * g2;
    B(5, 3 * a + 2) = g3;
  }
  return B;
}

std::array<int, 9> local_dofs(const std::array<int, 3>& tri) {
  std::array<int, 9> d{};
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) d[3 * a + c] = 3 * tri[a] + c;
  return d;
}

}  // namespace

DiskMesh build_disk_mesh(int level) {
  if (level < 0 || level > 8) throw DomainError("disk mesh refinement must be in [0, 8]");
  DiskMesh m;
  m.level = level;
  m.rings = 1 << level;
  const int n = m.rings;
  m.nodes.emplace_back(0.0, 0.0);
  for (int j = 1; j <= n; ++j) {
    const int cnt = 12 * j;
    const double r = static_cast<double>(j) / n;
    for (int k = 0; k < cnt; ++k) {
      const double th = 2.0 * M_PI * k / cnt;
      m.nodes.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  auto add = [&](int a, int b, int c) {
    const Vec2 e1 = m.nodes[b] - m.nodes[a], e2 = m.nodes[c] - m.nodes[a];
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0.0) std::swap(b, c);
    m.triangles.push_back({a, b, c});
  };
  for (int k = 0; k < 12; ++k) add(0, 1 + k, 1 + (k + 1) % 12);
  for (int j = 2; j <= n; ++j) {
    const int m1 = 12 * (j - 1), m2 = 12 * j;
    const int o1 = ring_offset(j - 1), o2 = ring_offset(j);
    int i1 = 0, i2 = 0;
    while (i1 < m1 || i2 < m2) {
      // Integer comparison of the next angles keeps the merge exactly symmetric.
      const bool outer = i2 < m2 && (i1 >= m1 || static_cast<long>(i2 + 1) * m1 <= static_cast<long>(i1 + 1) * m2);
      if (outer) {
        add(o1 + i1 % m1, o2 + i2 % m2, o2 + (i2 + 1) % m2);
        ++i2;
      } else {
        add(o1 + i1 % m1, o2 + i2 % m2, o1 + (i1 + 1) % m1);
        ++i1;
      }
    }
  }
  return m;
}

double DiskMesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  const Vec2 e1 = nodes[tr[1]] - nodes[tr[0]], e2 = nodes[tr[2]] - nodes[tr[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double DiskMesh::area() const {
  double a = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
  return a;
}

int DiskMesh::mirror(int k) const {
  if (k == 0) return 0;
  int j = 1;
  while (ring_offset(j + 1) <= k) ++j;
  const int cnt = 12 * j;
  return ring_offset(j) + (k - ring_offset(j) + cnt / 2) % cnt;
}

std::array<Vec2, 3> DiskMesh::quadrature_points(int t) const {
  const auto& tr = triangles[t];
  return {0.5 * (nodes[tr[0]] + nodes[tr[1]]), 0.5 * (nodes[tr[1]] + nodes[tr[2]]),
          0.5 * (nodes[tr[2]] + nodes[tr[0]])};
}

std::array<Vec2, 3> DiskMesh::basis_gradients(int t) const {
  const auto& tr = triangles[t];
  const Vec2 &p0 = nodes[tr[0]], &p1 = nodes[tr[1]], &p2 = nodes[tr[2]];
  const double a2 = 2.0 * triangle_area(t);
  return {Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / a2, Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / a2,
          Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / a2};
}

Vec6 rhs_vector(int i, const Vec2& Y) {
  Vec6 v = Vec6::Zero();
  switch (i) {
    case 0:
      v(1) = -0.5 * Y.y();
      v(2) = 0.5 * Y.x();
      break;
    case 1:
      v(0) = Y.y();
      break;
    case 2:
      v(0) = -Y.x();
      break;
    default:
      throw DomainError("rhs_vector index must be 0, 1 or 2");
  }
  return v;
}

Vec6 field_strain(const DiskMesh& mesh, const NodalField& psi, int t) {
  const auto d = local_dofs(mesh.triangles[t]);
  Eigen::Matrix<double, 9, 1> loc;
  for (int k = 0; k < 9; ++k) loc(k) = psi(d[k]);
  return strain_operator(mesh.basis_gradients(t)) * loc;
}

Vec3 field_value(const DiskMesh& mesh, const NodalField& psi, int t, const Vec2& Y) {
  const auto& tr = mesh.triangles[t];
  const auto g = mesh.basis_gradients(t);
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < 3; ++a) {
    const double lam = (a == 0 ? 1.0 : 0.0) + g[a].dot(Y - mesh.nodes[tr[0]]);
    out += lam * Vec3(psi(3 * tr[a]), psi(3 * tr[a] + 1), psi(3 * tr[a] + 2));
  }
  return out;
}

Eigen::SparseMatrix<double> assemble_stiffness(const DiskMesh& mesh, const Mat6& W) {
  const int n = 3 * mesh.node_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 81);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Bmat B = strain_operator(mesh.basis_gradients(t));
    const Eigen::Matrix<double, 9, 9> Ke = mesh.triangle_area(t) * B.transpose() * W * B;
    const auto d = local_dofs(mesh.triangles[t]);
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) trip.emplace_back(d[a], d[b], Ke(a, b));
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::SparseMatrix<double> assemble_mass(const DiskMesh& mesh) {
  const int n = 3 * mesh.node_count();
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const double A = mesh.triangle_area(t);
    const auto& tr = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) trip.emplace_back(3 * tr[a] + c, 3 * tr[b] + c, A * (a == b ? 2.0 : 1.0) / 12.0);
  }
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::MatrixXd constraint_matrix(const DiskMesh& mesh) {
  const int n = 3 * mesh.node_count();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(4, n);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const double w = mesh.triangle_area(t) / 3.0;
    const auto& tr = mesh.triangles[t];
    const auto qp = mesh.quadrature_points(t);
    // Barycentric values at the edge midpoints (01, 12, 20).
    const double lam[3][3] = {{0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}};
    for (int q = 0; q < 3; ++q) {
      for (int a = 0; a < 3; ++a) {
        const double v = w * lam[a][q];
        for (int c = 0; c < 3; ++c) C(c, 3 * tr[a] + c) += v;
        C(3, 3 * tr[a] + 1) += v * qp[q].y();
        C(3, 3 * tr[a] + 2) -= v * qp[q].x();
      }
    }
  }
  return C;
}

namespace {

Eigen::VectorXd assemble_rhs(const DiskMesh& mesh, const Mat6& Q, int i) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(3 * mesh.node_count());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Bmat B = strain_operator(mesh.basis_gradients(t));
    const double w = mesh.triangle_area(t) / 3.0;
    Vec6 acc = Vec6::Zero();
    for (const auto& y : mesh.quadrature_points(t)) acc += w * rhs_vector(i, y);
    const Eigen::Matrix<double, 9, 1> fe = B.transpose() * Q * acc;
    const auto d = local_dofs(mesh.triangles[t]);
    for (int k = 0; k < 9; ++k) F(d[k]) += fe(k);
  }
  return F;
}

}  // namespace

CorrectorSolution solve_correctors(const QForm6& q, const DiskMesh& mesh) {
  if (!(q.c > 0.0) || !(Eigen::SelfAdjointEigenSolver<Mat6>(q.Q, Eigen::EigenvaluesOnly).eigenvalues()(0) > 0.0))
    throw DomainError("corrector problem: Q is not positive definite");
  if (mesh.rings < 1) throw DomainError("corrector problem: mesh too coarse");
  const int nn = mesh.node_count();
  const int n = 3 * nn;
  const Eigen::SparseMatrix<double> K = assemble_stiffness(mesh, q.Q);
  const Eigen::MatrixXd C = constraint_matrix(mesh);

  // The kernel of e(.) is spanned by the three translations and the in-plane
  // rotation. Solve with those four entries pinned, then shift along the kernel
  // so the mean and moment constraints hold; the multipliers follow from the
  // residual of the unpinned equations.
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n, 4);
  for (int k = 0; k < nn; ++k) {
    for (int c = 0; c < 3; ++c) N(3 * k + c, c) = 1.0;
    N(3 * k + 1, 3) = -mesh.nodes[k].y();
    N(3 * k + 2, 3) = mesh.nodes[k].x();
  }
  std::vector<int> map(n, -1);
  std::vector<int> free;
  const int pinned[4] = {0, 1, 2, 3 * 1 + 2};
  for (int d = 0, m = 0; d < n; ++d) {
    if (std::find(std::begin(pinned), std::end(pinned), d) != std::end(pinned)) continue;
    map[d] = m++;
    free.push_back(d);
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) trip.emplace_back(map[it.row()], map[it.col()], it.value());
  Eigen::SparseMatrix<double> Kr(n - 4, n - 4);
  Kr.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kr);
  if (ldlt.info() != Eigen::Success)
    throw DomainError("corrector problem: singular system (mesh too coarse or Q degenerate)");
  const Eigen::Matrix4d CN = C * N;
  Eigen::FullPivLU<Eigen::Matrix4d> cn(CN);
  if (!cn.isInvertible()) throw DomainError("corrector problem: constraint-deficient mesh");
  const Eigen::Matrix4d CCt = C * C.transpose();

  CorrectorSolution sol;
  const double scale = q.C * mesh.area();
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd F = assemble_rhs(mesh, q.Q, i);
    Eigen::VectorXd Fr(n - 4);
    for (int k = 0; k < n - 4; ++k) Fr(k) = F(free[k]);
    const Eigen::VectorXd xr = ldlt.solve(-Fr);
    if (ldlt.info() != Eigen::Success || !xr.allFinite()) throw DomainError("corrector problem: solve failed");
    Eigen::VectorXd chi = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n - 4; ++k) chi(free[k]) = xr(k);
    chi -= N * cn.solve(C * chi);
    const Eigen::VectorXd r = -F - K * chi;
    sol.multipliers[i] = CCt.ldlt().solve(C * r);
    sol.chi[i] = chi;
    const double res = (r - C.transpose() * sol.multipliers[i]).norm() + (C * chi).norm();
    sol.residuals[i] = res / std::max(F.norm(), scale);
    if (sol.residuals[i] > 1e-10) throw DomainError("corrector problem: residual above 1e-10");
  }
  return sol;
}

BendTorsionMatrix compute_A(const QForm6& q, const DiskMesh& mesh) {
  return compute_A(q, mesh, solve_correctors(q, mesh));
}

BendTorsionMatrix compute_A(const QForm6& q, const DiskMesh& mesh, const CorrectorSolution& sol) {
  BendTorsionMatrix out;
  out.mesh_level = mesh.level;
  out.Q = q.Q;
  out.residuals = sol.residuals;
  Mat3 A = Mat3::Zero();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    std::array<Vec6, 3> e;
    for (int i = 0; i < 3; ++i) e[i] = field_strain(mesh, sol.chi[i], t);
    const double w = mesh.triangle_area(t) / 3.0;
    for (const auto& y : mesh.quadrature_points(t)) {
      std::array<Vec6, 3> s;
      for (int i = 0; i < 3; ++i) s[i] = rhs_vector(i, y) + e[i];
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k) A(l, k) += w * s[l].dot(q.Q * s[k]);
    }
  }
  out.A = 0.5 * (A + A.transpose());
  return out;
}

double brute_force_cell_min(const QForm6& q, const DiskMesh& mesh, const Vec3& gamma, bool free_z) {
  // Unknowns: psi at every node except the pinned gauge entries, then Z.
  const int nn = mesh.node_count();
  const int n = 3 * nn;
  // Gauge: all of psi at the boundary node (1, 0) and psi_3 at (-1, 0).
  const int east = nn - 12 * mesh.rings;
  const int west = east + 6 * mesh.rings;
  std::vector<int> map(n, -1);
  std::vector<bool> pinned(n, false);
  pinned[3 * east] = pinned[3 * east + 1] = pinned[3 * east + 2] = true;
  pinned[3 * west + 2] = true;
  int m = 0;
  for (int d = 0; d < n; ++d)
    if (!pinned[d]) map[d] = m++;
  const int zi = free_z ? m++ : -1;

  // Quadratic functional 1/2 x^T H x + g^T x + c, accumulated per quadrature point.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  double c = 0.0;
  Vec6 ez = Vec6::Zero();
  ez(0) = 1.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Bmat B = strain_operator(mesh.basis_gradients(t));
    const auto d = local_dofs(mesh.triangles[t]);
    // Columns: 9 local psi entries followed by Z.
    Eigen::Matrix<double, 6, 10> G = Eigen::Matrix<double, 6, 10>::Zero();
    G.leftCols<9>() = B;
    G.col(9) = ez;
    int idx[10];
    for (int k = 0; k < 9; ++k) idx[k] = map[d[k]];
    idx[9] = zi;
    const double w = mesh.triangle_area(t) / 3.0;
    for (const auto& y : mesh.quadrature_points(t)) {
      Vec6 s0 = Vec6::Zero();
      for (int i = 0; i < 3; ++i) s0 += gamma(i) * rhs_vector(i, y);
      const Eigen::Matrix<double, 10, 10> H = 2.0 * w * G.transpose() * q.Q * G;
      const Eigen::Matrix<double, 10, 1> gl = 2.0 * w * G.transpose() * q.Q * s0;
      c += w * s0.dot(q.Q * s0);
      for (int a = 0; a < 10; ++a) {
        if (idx[a] < 0) continue;
        g(idx[a]) += gl(a);
        for (int b = 0; b < 10; ++b)
          if (idx[b] >= 0) trip.emplace_back(idx[a], idx[b], H(a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> H(m, m);
  H.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
  if (ldlt.info() != Eigen::Success) throw DomainError("cell minimization: singular system");
  const Eigen::VectorXd x = ldlt.solve(-g);
  return c + 0.5 * g.dot(x);
}

}  // namespace rodlimit
