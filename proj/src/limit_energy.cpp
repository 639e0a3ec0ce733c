#include "rodlimit/limit_energy.hpp"

namespace rodlimit {

std::vector<Vec3> gamma_strains(const RotationField& R, const Skeleton& sk, int segment) {
  const auto& mesh = R.mesh;
  const Mat3 F = sk.segments.at(segment).frame();
  std::vector<Vec3> out;
  for (int k = 0; k < mesh.intervals_on(segment); ++k) {
    const double h = mesh.h(segment, k);
    if (!(h > 0.0)) throw DomainError("gamma_strains: zero-length interval");
    const Vec3 w = log_so3(R.at(segment, k).transpose() * R.at(segment, k + 1)) / h;
    out.push_back(F.transpose() * w);
  }
  return out;
}

J2Value assemble_J2(const CenterlineField& V, const RotationField& R, const Mat3& A, const LoadSet& loads,
                    const Skeleton& sk) {
  if (V.mesh.s != R.mesh.s || V.mesh.node_count != R.mesh.node_count)
    throw DomainError("assemble_J2: inconsistent discretizations");
  J2Value out;
  for (int i = 0; i < R.mesh.segment_count(); ++i) {
    const auto G = gamma_strains(R, sk, i);
    double e = 0.0;
    for (int k = 0; k < R.mesh.intervals_on(i); ++k) e += R.mesh.h(i, k) * G[k].dot(A * G[k]);
    out.segment_strain.push_back(e);
    out.strain += e;
  }
  out.L = evaluate_L(V, R, loads, sk);
  out.total = out.strain - out.L;
  return out;
}

double LimitStrainSamples::integrate(const QForm6& q) const {
  double s = 0.0;
  for (std::size_t k = 0; k < E.size(); ++k) s += weights[k] * q_of_strain(E[k], q);
  return s;
}

LimitStrainSamples assemble_limit_strain(const Vec3& gamma, double Z, const NodalField& u, const DiskMesh& mesh) {
  if (u.size() != 0 && u.size() != 3 * mesh.node_count())
    throw DomainError("assemble_limit_strain: warping field does not match the mesh");
  LimitStrainSamples out;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Vec6 e = u.size() ? field_strain(mesh, u, t) : Vec6::Zero();
    const double w = mesh.triangle_area(t) / 3.0;
    for (const auto& y : mesh.quadrature_points(t)) {
      const double Y2 = y.x(), Y3 = y.y();
      Mat3 E;
      E(0, 0) = -Y2 * gamma(2) + Y3 * gamma(1) + Z;
      E(0, 1) = -0.5 * Y3 * gamma(0) + e(1);
      E(0, 2) = 0.5 * Y2 * gamma(0) + e(2);
      E(1, 1) = e(3);
      E(1, 2) = e(4);
      E(2, 2) = e(5);
      E(1, 0) = E(0, 1);
      E(2, 0) = E(0, 2);
      E(2, 1) = E(1, 2);
      out.Y.push_back(y);
      out.weights.push_back(w);
      out.E.push_back(E);
    }
  }
  return out;
}

}  // namespace rodlimit
