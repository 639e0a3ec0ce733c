#pragma once

#include "rodlimit/fields.hpp"

#include <vector>

namespace rodlimit {

// Piecewise-linear densities along one segment, constant beyond the table ends.
struct LoadTable {
  std::vector<double> s;
  std::vector<Vec3> f, gn, gb;

  bool empty() const { return s.empty(); }
  Vec3 f_at(double x) const { return interp(f, x); }
  Vec3 gn_at(double x) const { return interp(gn, x); }
  Vec3 gb_at(double x) const { return interp(gb, x); }

private:
  Vec3 interp(const std::vector<Vec3>& v, double x) const;
};

// Reduced nodal load at a graph vertex: resultant Phi and moment matrix M.
struct NodeLoad {
  int vertex = -1;
  Vec3 Phi = Vec3::Zero();
  Mat3 M = Mat3::Zero();
};

struct LoadSet {
  double kappa = 2.0;
  std::vector<LoadTable> segments;  // empty or one table per segment
  std::vector<NodeLoad> nodes;

  double kappa_prime() const { return kappa <= 2.0 ? 2.0 * kappa - 2.0 : kappa; }
  void validate(const Skeleton& sk) const;
};

struct JunctionQuadrature {
  std::vector<Vec3> points;  // rescaled coordinates y around the knot
  std::vector<double> weights;
  std::vector<int> segment;  // owning rod piece
};

// Quadrature of the rescaled junction J_{A, rho0}: rod pieces of unit radius
// and half-length rho0 around the knot, overlaps kept by the lowest segment.
JunctionQuadrature junction_quadrature(const Skeleton& sk, int knot, int ns = 16, int nr = 6, int nth = 24);

struct ReducedJunctionLoad {
  Vec3 Phi;
  Mat3 M;
};

// Phi = int F, M = int G (y - A)^T. Rejects G with non-zero mean.
ReducedJunctionLoad reduce_junction_loads(const JunctionQuadrature& quad, const std::vector<Vec3>& F,
                                          const std::vector<Vec3>& G, const Vec3& A, double tol = 1e-8);

// Coefficients of L on a mesh: L = sum cV.(V - phi) + <cR, R - I>, with cR
// either nodal (trapezoid for nodal rotation fields) or per interval plus
// per vertex (piecewise-constant fields).
struct LoadFunctional {
  std::vector<Vec3> cV;           // per node
  std::vector<Mat3> cR_node;      // per node, line terms and vertex moments
  std::vector<Mat3> cR_interval;  // per interval, line terms only
  std::vector<Mat3> cM_vertex;    // per vertex, moment only
};

LoadFunctional build_load_functional(const Skeleton& sk, const RodMesh& mesh, const LoadSet& loads);

double evaluate_L(const CenterlineField& V, const RotationField& R, const LoadSet& loads, const Skeleton& sk);
double evaluate_L(const CenterlineField& V, const ConvexRotationField& R, const LoadSet& loads,
                  const Skeleton& sk);

}  // namespace rodlimit
