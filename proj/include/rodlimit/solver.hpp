#pragma once

#include "rodlimit/limit_energy.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rodlimit {

struct SolveOptions {
  int max_iterations = 200;          // Newton iterations per augmented Lagrangian round
  int max_outer = 30;                // augmented Lagrangian rounds
  double gradient_tolerance = 1e-9;  // Riemannian gradient norm
  double closure_tolerance = 1e-10;  // cycle-closure residual (length units)
  double penalty = 10.0;             // initial penalty, in units of |A| / (total length)^3
  int intervals_per_edge = 16;
  int sample_count = 60;             // rotation samples for the conv(SO(3)) path
  unsigned seed = 0;

  void validate() const;
};

struct SolveReport {
  double kappa = 2.0;
  double energy = 0.0;  // J2 (kappa = 2) or min -L (kappa in (1, 2))
  double L = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  double gradient_norm = 0.0;
  double max_closure = 0.0;
  double feasibility_residual = 0.0;
  bool converged = false;
  std::vector<std::string> flags;
  std::vector<std::vector<Vec3>> gamma;  // per segment, per interval
  // Merit value after each accepted step, tagged with its outer round.
  std::vector<std::pair<int, double>> trace;
};

// Spanning forest of the mesh graph grown from the anchor nodes.
struct MeshTree {
  std::vector<int> order;          // nodes in breadth-first order
  std::vector<int> parent;         // parent node, -1 for roots and unreachable nodes
  std::vector<int> parent_interval;
  std::vector<double> sign;        // V(child) = V(parent) + sign * Delta(interval)
  std::vector<int> chords;         // non-tree intervals
  std::vector<int> interval_start, interval_end, interval_segment;
};

MeshTree build_mesh_tree(const RodMesh& mesh, const std::vector<int>& roots);

struct CenterlineResult {
  CenterlineField V;
  std::vector<double> closure;  // per chord interval
  double max_closure = 0.0;
};

// Exact integration of dV/ds = R t on each geodesic interval. Anchors are
// (vertex, value) pairs; by default the clamped extremities with V = phi.
CenterlineResult reconstruct_centerline(const RotationField& R, const Skeleton& sk,
                                        const std::vector<std::pair<int, Vec3>>& anchors = {});

// Discrete J2 with augmented Lagrangian closure terms over nodal rotations.
class Kappa2Problem {
public:
  Kappa2Problem(const Skeleton& sk, const RodMesh& mesh, const Mat3& A, const LoadSet& loads);

  double value(const std::vector<Mat3>& R) const;
  // Body-frame gradient (right perturbations R exp(xi^)), zero at fixed nodes.
  std::vector<Vec3> gradient(const std::vector<Mat3>& R) const;
  std::vector<Vec3> positions(const std::vector<Mat3>& R) const;
  std::vector<Vec3> closure(const std::vector<Mat3>& R) const;
  double strain(const std::vector<Mat3>& R) const;
  double load_value(const std::vector<Mat3>& R) const;  // L

  const std::vector<bool>& fixed() const { return fixed_; }
  const MeshTree& tree() const { return tree_; }

  std::vector<Vec3> multipliers;  // per chord
  double penalty = 0.0;

private:
  struct Eval;
  Eval evaluate(const std::vector<Mat3>& R) const;

  const Skeleton& sk_;
  RodMesh mesh_;
  MeshTree tree_;
  LoadFunctional lf_;
  std::vector<Vec3> phi_;
  std::vector<bool> fixed_;
  std::vector<Mat3> Atilde_;  // per segment, F A F^T
  std::vector<Vec3> t_;       // per segment
};

struct Kappa2Solution {
  CenterlineField V;
  RotationField R;
  SolveReport report;
};

Kappa2Solution minimize_kappa2(const Skeleton& sk, const Mat3& A, const LoadSet& loads, const SolveOptions& opts);
Kappa2Solution minimize_kappa2(const Skeleton& sk, const Mat3& A, const LoadSet& loads, const SolveOptions& opts,
                               const RodMesh& mesh);

struct Kappa1Solution {
  CenterlineField V;
  ConvexRotationField R;
  SolveReport report;
};

Kappa1Solution minimize_kappa1(const Skeleton& sk, const LoadSet& loads, const SolveOptions& opts);

}  // namespace rodlimit
