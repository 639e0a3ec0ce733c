#include "helpers.hpp"
#include "rodlimit/material.hpp"
#include "rodlimit/rotation.hpp"

#include <doctest.h>

#include <cmath>

using namespace rodlimit;

TEST_SUITE("material") {
  TEST_CASE("SVK density") {
    const SvkMaterial mat{1.3, 0.7};
    CHECK(svk_density(Mat3::Identity(), mat) == 0.0);
    CHECK(std::abs(svk_density(exp_so3(Vec3(0.3, -1.0, 2.0)), mat)) < 1e-14);
    for (double e : {-0.3, 0.01, 0.2}) {
      const Mat3 F = Vec3(1 + e, 1, 1).asDiagonal();
      const double expected = (mat.lambda / 2 + mat.mu) * std::pow(e + e * e / 2, 2);
      CHECK(svk_density(F, mat) == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(std::isinf(svk_density(Mat3(Vec3(1, 1, -1).asDiagonal()), mat)));
    CHECK(std::isinf(svk_density(Mat3::Zero(), mat)));
  }

  TEST_CASE("frame indifference and coercivity") {
    const SvkMaterial mat{1.0, 1.0};
    const QForm6 q = isotropic_q6(mat);
    std::mt19937 rng(11);
    for (int k = 0; k < 500; ++k) {
      Mat3 G;
      for (int c = 0; c < 3; ++c) G.col(c) = testing::random_vec(rng, 0.2);
      const Mat3 F = testing::random_rotation(rng) * (Mat3::Identity() + G);
      const double W = svk_density(F, mat);
      const Mat3 Q = testing::random_rotation(rng);
      CHECK(svk_density(Q * F, mat) == doctest::Approx(W).epsilon(1e-12));
      const double dist = (F - project_to_rotation(F).R).norm();
      CHECK(W >= q.c / 4.0 * dist * dist * (1.0 - 1e-12));
    }
  }

  TEST_CASE("isotropic quadratic form") {
    const QForm6 q0 = isotropic_q6({0.0, 1.0});
    CHECK((q0.Q - Mat6(2.0 * Mat6::Identity())).norm() == 0.0);
    const QForm6 q1 = isotropic_q6({1.0, 1.0});
    CHECK(q1.Q(0, 0) == 3.0);
    CHECK(q1.Q(0, 3) == 1.0);
    CHECK(q1.Q(1, 1) == 2.0);
    for (double lam : {0.0, 0.5, 4.0})
      for (double mu : {0.2, 1.0}) {
        const QForm6 q = isotropic_q6({lam, mu});
        CHECK(q.c >= 2.0 * mu * (1.0 - 1e-12));
      }
    CHECK_THROWS_AS(isotropic_q6({-3.0, 1.0}), DomainError);
    CHECK_THROWS_AS(isotropic_q6({1.0, 0.0}), DomainError);
  }

  TEST_CASE("explicit quadratic forms are validated") {
    Mat6 Q = Mat6::Identity();
    Q(0, 1) = 0.5;
    CHECK_THROWS_AS(QForm6::from_matrix(Q), DomainError);
    Q(1, 0) = 0.5;
    CHECK_NOTHROW(QForm6::from_matrix(Q));
    Mat6 indefinite = Mat6::Identity();
    indefinite(3, 3) = -1.0;
    CHECK_THROWS_AS(QForm6::from_matrix(indefinite), DomainError);
  }

  TEST_CASE("quadratic form of a strain") {
    const QForm6 q0 = isotropic_q6({0.0, 1.0});
    CHECK(q_of_strain(Mat3::Zero(), q0) == 0.0);
    Mat3 E = Mat3::Zero();
    E(0, 1) = E(1, 0) = 0.3;
    CHECK(q_of_strain(E, q0) == doctest::Approx(2 * 0.09).epsilon(1e-14));
    // Torsion strain: density (mu / 2)(Y2^2 + Y3^2).
    const QForm6 q = isotropic_q6({1.0, 0.8});
    const double Y2 = 0.3, Y3 = -0.4;
    Mat3 T = Mat3::Zero();
    T(0, 1) = T(1, 0) = -Y3 / 2;
    T(0, 2) = T(2, 0) = Y2 / 2;
    CHECK(q_of_strain(T, q) == doctest::Approx(0.8 / 2 * (Y2 * Y2 + Y3 * Y3)).epsilon(1e-14));
    std::mt19937 rng(12);
    Mat3 S;
    for (int c = 0; c < 3; ++c) S.col(c) = testing::random_vec(rng);
    S = 0.5 * (S + S.transpose()).eval();
    CHECK(q_of_strain(2.5 * S, q) == doctest::Approx(6.25 * q_of_strain(S, q)).epsilon(1e-14));
    Mat3 N = S;
    N(0, 1) += 0.4;
    bool flag = false;
    const double v = q_of_strain(N, q, &flag);
    CHECK(flag);
    CHECK(v == doctest::Approx(q_of_strain(0.5 * (N + N.transpose()), q)).epsilon(1e-14));
  }
}
