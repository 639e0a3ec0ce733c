#pragma once

#include "rodlimit/types.hpp"

#include <vector>

namespace rodlimit {

Mat3 exp_so3(const Vec3& w);

// Principal logarithm; the returned angle lies in [0, pi]. For a half turn the
// axis sign is chosen so that its largest component is positive.
Vec3 log_so3(const Mat3& R);

bool is_rotation(const Mat3& R, double tol = 1e-10);

// Left and right Jacobians of exp and their inverses.
Mat3 jacobian_left(const Vec3& w);
Mat3 jacobian_right(const Vec3& w);
Mat3 jacobian_left_inv(const Vec3& w);
Mat3 jacobian_right_inv(const Vec3& w);

struct Projection {
  Mat3 R;
  bool nonunique = false;
};

// Nearest rotation in the Frobenius norm (polar factor with det forced to +1).
Projection project_to_rotation(const Mat3& M);

struct Interpolation {
  Mat3 R;
  bool half_turn = false;
};

// R0 exp(tau log(R0^T R1)).
Interpolation geodesic_interpolate(const Mat3& R0, const Mat3& R1, double tau);

struct ConvexRotation {
  Mat3 M = Mat3::Identity();
  std::vector<double> weights;
  std::vector<Mat3> rotations;

  bool has_certificate() const { return !weights.empty(); }
  // Residual of the certificate and the largest singular value of M.
  double certificate_error() const;
  double max_singular_value() const;
};

ConvexRotation conv_combination(const std::vector<double>& weights,
                                const std::vector<Mat3>& rotations,
                                double tol = 1e-12);

Eigen::Quaterniond to_quaternion(const Mat3& R);

// Deterministic rotation sets: 24 is the chiral octahedral group, 60 the
// chiral icosahedral group (counts 25..59 are rejected), larger counts extend the icosahedral group with a
// low-discrepancy quaternion sequence (nested for counts >= 60).
std::vector<Mat3> rotation_samples(int count);

}  // namespace rodlimit
