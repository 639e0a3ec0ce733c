#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rodlimit;
using testing::seg;

TEST_SUITE("skeleton") {
  TEST_CASE("single rod") {
    const Skeleton sk = testing::single_rod();
    CHECK(sk.knots.empty());
    CHECK(sk.extremities.size() == 2);
    CHECK(sk.clamped.size() == 1);
    CHECK(sk.independent_cycle_count() == 0);
    const JunctionReport rep = validate_junctions(sk, 0.1);
    CHECK(rep.ok());
  }

  TEST_CASE("L-frame has one knot shared by extremities") {
    const Skeleton sk = build_skeleton({seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3::Zero(), Vec3::UnitY())},
                                       {{0, true}});
    REQUIRE(sk.knots.size() == 1);
    CHECK(sk.knots[0].position.norm() < 1e-15);
    CHECK(sk.knots[0].extremity_of_all);
    CHECK(sk.extremities.size() == 2);
  }

  TEST_CASE("interior crossing is a knot but not an extremity knot") {
    const Skeleton sk = build_skeleton({seg(Vec3(-1, 0, 0), Vec3(1, 0, 0)), seg(Vec3(0, -1, 0), Vec3(0, 1, 0))},
                                       {{0, false}});
    REQUIRE(sk.knots.size() == 1);
    CHECK_FALSE(sk.knots[0].extremity_of_all);
    for (const auto& inc : sk.knots[0].incidences) CHECK(std::abs(inc.arc - 1.0) < 1e-12);
    CHECK(sk.extremities.size() == 4);
  }

  TEST_CASE("triangle has three knots and one cycle") {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0.5, std::sqrt(3.0) / 2, 0);
    const Skeleton sk = build_skeleton({seg(a, b), seg(b, c), seg(c, a)}, {});
    CHECK(sk.knots.size() == 3);
    CHECK(sk.extremities.empty());
    CHECK(sk.independent_cycle_count() == 1);
    CHECK(std::abs(sk.delta0 - 0.25 * 1.0 / sk.rho0) < 1e-12);
  }

  TEST_CASE("frames and knot consistency") {
    const Skeleton sk = build_skeleton({seg(Vec3::Zero(), Vec3(1, 2, 3)), seg(Vec3(1, 2, 3), Vec3(0, 0, 5)),
                                        seg(Vec3(1, 2, 3), Vec3(-1, 1, 0))},
                                       {{0, false}});
    for (const Segment& s : sk.segments) {
      CHECK((s.frame().transpose() * s.frame() - Mat3::Identity()).norm() < 1e-12);
      CHECK((s.t.cross(s.n) - s.b).norm() < 1e-12);
    }
    for (const Knot& k : sk.knots)
      for (const auto& inc : k.incidences)
        CHECK((sk.segments[inc.segment].point(inc.arc) - k.position).norm() <= 1e-9 * std::max(1.0, k.position.norm()));
  }

  TEST_CASE("default frame rule") {
    auto [n1, b1] = default_frame(Vec3::UnitX());
    CHECK((n1 - Vec3::UnitY()).norm() < 1e-15);
    CHECK((b1 - Vec3::UnitZ()).norm() < 1e-15);
    auto [n3, b3] = default_frame(Vec3::UnitZ());
    CHECK((n3 + Vec3::UnitY()).norm() < 1e-15);
    CHECK((b3 - Vec3::UnitX()).norm() < 1e-15);
  }

  TEST_CASE("connectivity does not depend on segment order") {
    const std::vector<SegmentSpec> specs = {seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3::UnitX(), Vec3(1, 1, 0)),
                                            seg(Vec3(1, 1, 0), Vec3(1, 1, 1))};
    const Skeleton a = build_skeleton(specs, {{0, false}});
    const Skeleton b = build_skeleton({specs[2], specs[0], specs[1]}, {{1, false}});
    CHECK(a.knots.size() == b.knots.size());
    CHECK(a.extremities.size() == b.extremities.size());
  }

  TEST_CASE("rejected geometries") {
    CHECK_THROWS_AS(build_skeleton({}, {}), DomainError);
    CHECK_THROWS_AS(build_skeleton({seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3(0, 1, 0), Vec3(1, 1, 0))}, {}),
                    DomainError);
    CHECK_THROWS_AS(build_skeleton({seg(Vec3::Zero(), Vec3(2, 0, 0)), seg(Vec3(1, 0, 0), Vec3(3, 0, 0))}, {}),
                    DomainError);
    CHECK_THROWS_AS(build_skeleton({seg(Vec3::Zero(), Vec3::UnitX())}, {}, 0.5), DomainError);
    // The crossing point of two rods is not an extremity and cannot be clamped there.
    CHECK_THROWS_AS(build_skeleton({seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3::Zero(), Vec3::UnitY())},
                                   {{0, false}}),
                    DomainError);
  }

  TEST_CASE("junction checks") {
    const Skeleton sk = testing::l_frame();
    const JunctionReport good = validate_junctions(sk, 1.0 / 100.0);
    CHECK(good.ok());
    CHECK(good.max_diameter <= good.diameter_bound);
    const Skeleton wide = build_skeleton({seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3::UnitX(), Vec3(1, 1, 0)),
                                          seg(Vec3(1, 1, 0), Vec3(0, 1, 0))},
                                         {{0, false}}, 50.0, 0.2);
    CHECK_FALSE(validate_junctions(wide, 0.2).ok());
    CHECK(in_rod(sk, 0, 0.1, Vec3(0.5, 0.05, 0.05)));
    CHECK_FALSE(in_rod(sk, 0, 0.1, Vec3(0.5, 0.2, 0.0)));
    CHECK(in_junction(sk, 0, sk.rho0, 0.05, Vec3(1.0, 0.05, 0.0)));
    CHECK_FALSE(in_junction(sk, 0, sk.rho0, 0.05, Vec3(0.5, 0.0, 0.0)));
  }
}
