#include "helpers.hpp"
#include "oracles.hpp"
#include "rodlimit/loads.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace rodlimit;

TEST_SUITE("oracles") {
  TEST_CASE("dense rod minimizer: zero loads") {
    oracle::CantileverProblem p;
    const oracle::OracleResult r = oracle::dense_rod_minimizer(p, 200, 2);
    CHECK(r.value == 0.0);
    for (const Vec3& g : r.gamma) CHECK(g.norm() == 0.0);
    CHECK_FALSE(r.resolution.empty());
  }

  TEST_CASE("dense rod minimizer: end couple about the binormal") {
    oracle::CantileverProblem p;
    p.A = Vec3(1, 2, 3).asDiagonal();
    p.M = skew(Vec3::UnitZ());
    const oracle::OracleResult r = oracle::dense_rod_minimizer(p, 200, 3);
    CHECK_FALSE(r.flagged);
    for (double v : r.restart_values) CHECK(std::abs(v - r.value) <= 1e-8 * (1 + std::abs(r.value)));
    double g = 0.3;
    for (int k = 0; k < 50; ++k) g -= (3 * g - std::cos(g)) / (3 + std::sin(g));
    CHECK(r.value == doctest::Approx(3 * g * g - 2 * std::sin(g)).epsilon(1e-6));
    double mean = 0.0, var = 0.0;
    for (const Vec3& G : r.gamma) mean += G(2) / r.gamma.size();
    for (const Vec3& G : r.gamma) var += std::pow(G(2) - mean, 2) / r.gamma.size();
    CHECK(var <= 1e-8);
  }

  TEST_CASE("dense rod minimizer: torsion couple") {
    oracle::CantileverProblem p;
    p.A = Vec3(0.5, 2, 2).asDiagonal();
    p.M = 0.4 * skew(Vec3::UnitX());
    const oracle::OracleResult r = oracle::dense_rod_minimizer(p, 200, 2);
    // J(g) = 0.5 g^2 - 0.8 sin g, stationary where g = 0.8 cos g.
    double g = 0.5;
    for (int k = 0; k < 50; ++k) g -= (g - 0.8 * std::cos(g)) / (1 + 0.8 * std::sin(g));
    CHECK(r.value == doctest::Approx(0.5 * g * g - 0.8 * std::sin(g)).epsilon(1e-6));
  }

  TEST_CASE("enumeration oracle") {
    const auto S = rotation_samples(60);
    CHECK(oracle::grid_conv_hull_optimum(1, 60, [](const std::vector<int>&) { return 0.0; }).value == 0.0);
    // Tip force on a unit rod along e1: -L = -Phi.(S t - t), optimum -(|Phi| - Phi.t) up to the sample gap.
    const Vec3 Phi(-0.5, 0.7, 0.2);
    const oracle::OracleResult r = oracle::grid_conv_hull_optimum(
        1, 60, [&](const std::vector<int>& a) { return -Phi.dot(S[a[0]] * Vec3::UnitX() - Vec3::UnitX()); });
    const double exact = -(Phi.norm() - Phi.dot(Vec3::UnitX()));
    CHECK(r.value >= exact - 1e-12);
    CHECK(std::abs(r.value - exact) <= 0.05 * std::abs(exact));
    CHECK_THROWS_AS(oracle::grid_conv_hull_optimum(4, 24, [](const std::vector<int>&) { return 0.0; }),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle::grid_conv_hull_optimum(1, 61, [](const std::vector<int>&) { return 0.0; }),
                    std::invalid_argument);
  }

  TEST_CASE("Horn fit recovers a rigid motion") {
    std::mt19937 rng(71);
    const Mat3 Q = testing::random_rotation(rng);
    const Vec3 A(0.5, 0, 0), a(1, 2, 3);
    std::vector<Vec3> x, v;
    std::vector<double> w;
    for (int k = 0; k < 10; ++k) {
      x.push_back(testing::random_vec(rng));
      v.push_back(a + Q * (x.back() - A));
      w.push_back(1.0 + k);
    }
    const oracle::RigidMotion m = oracle::horn_rigid_fit(x, v, w, A);
    CHECK((m.R - Q).norm() < 1e-12);
    CHECK((m.a - a).norm() < 1e-12);
  }
}
