#pragma once

#include "rodlimit/material.hpp"

#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace rodlimit {

// Concentric-ring triangulation of the unit disk: ring j (1..2^level) carries
// 12 j equally spaced nodes starting at angle 0, so the mesh is invariant
// under Y -> -Y.
struct DiskMesh {
  int level = 0;
  int rings = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;

  int node_count() const { return static_cast<int>(nodes.size()); }
  double triangle_area(int t) const;
  double area() const;
  // Index of the image of node k under Y -> -Y.
  int mirror(int k) const;
  // Edge-midpoint rule, exact for quadratics.
  std::array<Vec2, 3> quadrature_points(int t) const;
  // Gradients of the three barycentric coordinates of triangle t.
  std::array<Vec2, 3> basis_gradients(int t) const;
  // Integral of f(Y) over the mesh with the triangle quadrature.
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
      const double w = triangle_area(t) / 3.0;
      for (const auto& y : quadrature_points(t)) s += w * f(y);
    }
    return s;
  }
};

DiskMesh build_disk_mesh(int level);

// Fields on the mesh: 3 values per node (axial, Y2, Y3 components).
using NodalField = Eigen::VectorXd;

// Right-hand side vectors V_1 (torsion), V_2, V_3 (bending) at Y.
Vec6 rhs_vector(int i, const Vec2& Y);

// Strain 6-vector of a P1 field restricted to triangle t (constant per triangle).
Vec6 field_strain(const DiskMesh& mesh, const NodalField& psi, int t);

// P1 interpolation of a nodal field at a point of triangle t.
Vec3 field_value(const DiskMesh& mesh, const NodalField& psi, int t, const Vec2& Y);

// Sparse Gram matrix int (B psi) . W (B phi) for a 6x6 weight W.
Eigen::SparseMatrix<double> assemble_stiffness(const DiskMesh& mesh, const Mat6& W);
// Consistent L2 mass matrix for the 3-component field.
Eigen::SparseMatrix<double> assemble_mass(const DiskMesh& mesh);
// Constraint rows of W: the three means and the rotational moment.
Eigen::MatrixXd constraint_matrix(const DiskMesh& mesh);

struct CorrectorSolution {
  std::array<NodalField, 3> chi;
  std::array<Eigen::Vector4d, 3> multipliers;
  std::array<double, 3> residuals{};
};

CorrectorSolution solve_correctors(const QForm6& q, const DiskMesh& mesh);

struct BendTorsionMatrix {
  Mat3 A = Mat3::Zero();
  int mesh_level = 0;
  Mat6 Q = Mat6::Zero();
  std::array<double, 3> residuals{};
};

BendTorsionMatrix compute_A(const QForm6& q, const DiskMesh& mesh);
BendTorsionMatrix compute_A(const QForm6& q, const DiskMesh& mesh, const CorrectorSolution& sol);

// Direct minimization of int Q(Gamma_k V_k + Z e_1 + e(psi)) over (Z, psi)
// with pinned gauge degrees of freedom; Z is held at 0 when free_z is false.
double brute_force_cell_min(const QForm6& q, const DiskMesh& mesh, const Vec3& gamma, bool free_z = true);

}  // namespace rodlimit
