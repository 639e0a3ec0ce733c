#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/loads.hpp"

#include <vector>

namespace rodlimit {

// Gamma = (Gamma_1, Gamma_2, Gamma_3) per interval of segment i, from the
// constant body angular velocity log(R_k^T R_{k+1}) / h.
std::vector<Vec3> gamma_strains(const RotationField& R, const Skeleton& sk, int segment);

struct J2Value {
  double total = 0.0;
  double strain = 0.0;
  double L = 0.0;
  std::vector<double> segment_strain;
};

J2Value assemble_J2(const CenterlineField& V, const RotationField& R, const Mat3& A, const LoadSet& loads,
                    const Skeleton& sk);

// Limit strain matrix sampled at the disk quadrature points, in the local
// (t, n, b) basis.
struct LimitStrainSamples {
  std::vector<Vec2> Y;
  std::vector<double> weights;
  std::vector<Mat3> E;

  // (t|n|b) E (t|n|b)^T at sample k.
  Mat3 ambient(int k, const Mat3& frame) const { return frame * E[k] * frame.transpose(); }
  double integrate(const QForm6& q) const;
};

// Gamma, Z and an optional warping field u (nodal, 3 components per node,
// empty for zero).
LimitStrainSamples assemble_limit_strain(const Vec3& gamma, double Z, const NodalField& u, const DiskMesh& mesh);

}  // namespace rodlimit
