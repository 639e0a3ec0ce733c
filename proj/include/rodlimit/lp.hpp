#pragma once

#include <Eigen/Dense>

namespace rodlimit {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  Status status = Status::IterationLimit;
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int redundant_rows = 0;
};

// min c.x subject to A x = b, x >= 0. Dense two-phase simplex; Dantzig pricing
// with a switch to Bland's rule on degenerate stalls.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                  int max_iterations = 200000);

}  // namespace rodlimit
