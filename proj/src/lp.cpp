#include "rodlimit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rodlimit {

namespace {

struct Tableau {
  Eigen::MatrixXd T;  // rows 0..m-1 constraints, row m objective; last column rhs
  std::vector<int> basis;
  int m, ncols;
  double tol;

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = T(i, c);
      if (f != 0.0) T.row(i) -= f * T.row(r);
    }
    basis[r] = c;
  }

  // Minimizes the objective row over columns [0, allowed). Returns status.
  LpResult::Status run(int allowed, int& iterations, int max_iterations) {
    int degenerate = 0;
    while (iterations < max_iterations) {
      const bool bland = degenerate > 50;
      int enter = -1;
      double best = -tol;
      for (int j = 0; j < allowed; ++j) {
        if (T(m, j) < best) {
          enter = j;
          if (bland) break;
          best = T(m, j);
        }
      }
      if (enter < 0) return LpResult::Status::Optimal;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double a = T(i, enter);
        if (a > tol) {
          const double q = T(i, ncols) / a;
          if (q < ratio - 1e-14 || (std::abs(q - ratio) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
            ratio = q;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpResult::Status::Unbounded;
      degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
    return LpResult::Status::IterationLimit;
  }
};

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iterations) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  LpResult res;
  Tableau tb;
  tb.m = m;
  tb.ncols = n + m;
  const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  tb.tol = 1e-11 * scale;
  tb.T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
    tb.T.row(i).head(n) = sgn * A.row(i);
    tb.T(i, n + i) = 1.0;
    tb.T(i, n + m) = sgn * b(i);
    tb.basis[i] = n + i;
  }
  // Phase 1: minimize the sum of artificials.
  for (int i = 0; i < m; ++i) tb.T.row(m) -= tb.T.row(i);
  for (int i = 0; i < m; ++i) tb.T(m, n + i) = 0.0;
  auto status = tb.run(n, res.iterations, max_iterations);
  if (status == LpResult::Status::IterationLimit) {
    res.status = status;
    return res;
  }
  if (-tb.T(m, n + m) > 1e-9 * scale * std::max(1, m)) {
    res.status = LpResult::Status::Infeasible;
    return res;
  }
  // Drive artificials out of the basis; rows where that is impossible are redundant.
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    int col = -1;
    double big = tb.tol * 1e3;
    for (int j = 0; j < n; ++j)
      if (std::abs(tb.T(i, j)) > big) {
        big = std::abs(tb.T(i, j));
        col = j;
      }
    if (col >= 0) {
      tb.pivot(i, col);
    } else {
      tb.T.row(i).setZero();
      ++res.redundant_rows;
    }
  }
  // Phase 2 objective row.
  tb.T.row(m).setZero();
  tb.T.row(m).head(n) = c.transpose();
  for (int i = 0; i < m; ++i) {
    const int bj = tb.basis[i];
    if (bj < n && c(bj) != 0.0) tb.T.row(m) -= c(bj) * tb.T.row(i);
  }
  status = tb.run(n, res.iterations, max_iterations);
  res.status = status;
  if (status != LpResult::Status::Optimal) return res;
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) res.x(tb.basis[i]) = std::max(0.0, tb.T(i, n + m));
  res.value = c.dot(res.x);
  return res;
}

}  // namespace rodlimit
