#include "rodlimit/lp.hpp"

#include <doctest.h>

using rodlimit::LpResult;
using rodlimit::solve_lp;

TEST_SUITE("lp") {
  TEST_CASE("small problem with a known optimum") {
    // min -x1 - 2 x2  s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6.
    Eigen::VectorXd c(4);
    c << -1, -2, 0, 0;
    Eigen::MatrixXd A(2, 4);
    A << 1, 1, 1, 0, 1, 3, 0, 1;
    Eigen::VectorXd b(2);
    b << 4, 6;
    const LpResult r = solve_lp(c, A, b);
    REQUIRE(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(r.x(0) == doctest::Approx(3.0));
    CHECK(r.x(1) == doctest::Approx(1.0));
    CHECK((A * r.x - b).norm() < 1e-12);
  }

  TEST_CASE("infeasible and unbounded problems") {
    Eigen::VectorXd c(2);
    c << 1, 1;
    Eigen::MatrixXd A(2, 2);
    A << 1, 1, 1, 1;
    Eigen::VectorXd b(2);
    b << 1, 2;
    CHECK(solve_lp(c, A, b).status == LpResult::Status::Infeasible);
    Eigen::VectorXd cu(2);
    cu << -1, 0;
    Eigen::MatrixXd Au(1, 2);
    Au << 1, -1;
    Eigen::VectorXd bu(1);
    bu << 1;
    CHECK(solve_lp(cu, Au, bu).status == LpResult::Status::Unbounded);
  }

  TEST_CASE("redundant rows and degenerate vertices") {
    // Beale's cycling example in equality form.
    Eigen::VectorXd c(7);
    c << -0.75, 150, -0.02, 6, 0, 0, 0;
    Eigen::MatrixXd A(3, 7);
    A << 0.25, -60, -0.04, 9, 1, 0, 0,
         0.5, -90, -0.02, 3, 0, 1, 0,
         0, 0, 1, 0, 0, 0, 1;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    const LpResult r = solve_lp(c, A, b);
    REQUIRE(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(-0.05).epsilon(1e-10));

    Eigen::MatrixXd Ar(3, 3);
    Ar << 1, 1, 1, 2, 2, 2, 1, 0, 0;
    Eigen::VectorXd br(3);
    br << 1, 2, 0.25;
    Eigen::VectorXd cr(3);
    cr << 0, 1, 2;
    const LpResult rr = solve_lp(cr, Ar, br);
    REQUIRE(rr.status == LpResult::Status::Optimal);
    CHECK(rr.value == doctest::Approx(0.75));
    CHECK(rr.redundant_rows == 1);
  }
}
