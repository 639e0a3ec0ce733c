#pragma once

#include "rodlimit/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace oracle {

using rodlimit::Mat3;
using rodlimit::Vec3;

struct OracleResult {
  double value = 0.0;
  std::string method;
  std::string resolution;
  bool flagged = false;  // restarts disagree beyond tolerance
  std::vector<double> restart_values;
  std::vector<Vec3> gamma;  // per interval, local (t, n, b) components
  std::vector<int> assignment;
};

// Straight rod of the given length clamped at s = 0 with R(0) = I. Stiffness A
// acts on local strain components; Phi is a dead force and M a moment matrix
// at the free end, so the load is Phi.(V(L) - phi(L)) + <R(L) - I, M>.
struct CantileverProblem {
  double length = 1.0;
  Mat3 frame = Mat3::Identity();  // columns t, n, b
  Mat3 A = Mat3::Identity();
  Vec3 Phi = Vec3::Zero();
  Mat3 M = Mat3::Zero();
};

// L-BFGS on nodal axis-angle coordinates with finite-difference gradients and
// seeded random restarts. Strains use the chord formula
// vee(R_k^T R_{k+1} - R_{k+1}^T R_k) / (2h) and the tip position uses the
// trapezoid rule.
OracleResult dense_rod_minimizer(const CantileverProblem& p, int n = 200, int restarts = 3, unsigned seed = 7);

// Exhaustive minimum of objective(assignment) over all assignments of one of
// `choices` options to each of `slots` slots; at most 3 slots and 60 choices.
OracleResult grid_conv_hull_optimum(int slots, int choices,
                                    const std::function<double(const std::vector<int>&)>& objective);

struct RigidMotion {
  Vec3 a = Vec3::Zero();
  Mat3 R = Mat3::Identity();
};

// Weighted fit v(x) ~ a + R (x - A) by Horn's unit-quaternion method.
RigidMotion horn_rigid_fit(const std::vector<Vec3>& x, const std::vector<Vec3>& v, const std::vector<double>& w,
                           const Vec3& A);

}  // namespace oracle
