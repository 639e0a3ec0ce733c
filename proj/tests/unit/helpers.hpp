#pragma once

#include "rodlimit/skeleton.hpp"

#include <random>

namespace testing {

using rodlimit::Mat3;
using rodlimit::Vec3;

inline Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return scale * Vec3(u(rng), u(rng), u(rng));
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

inline rodlimit::SegmentSpec seg(const Vec3& a, const Vec3& b) { return rodlimit::SegmentSpec::from_endpoints(a, b); }

// Unit segment along e1 clamped at s = 0.
inline rodlimit::Skeleton single_rod(double length = 1.0) {
  return rodlimit::build_skeleton({seg(Vec3::Zero(), length * Vec3::UnitX())}, {{0, false}});
}

// Segment 0 from the origin to e1, segment 1 from e1 to e1 + e2; clamped at the origin.
inline rodlimit::Skeleton l_frame() {
  return rodlimit::build_skeleton({seg(Vec3::Zero(), Vec3::UnitX()), seg(Vec3::UnitX(), Vec3(1, 1, 0))},
                                  {{0, false}});
}

}  // namespace testing
