#include "rodlimit/material.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rodlimit {

void SvkMaterial::validate() const {
  if (!(mu > 0.0)) throw DomainError("material: mu must be positive");
  if (!(lambda >= 0.0)) throw DomainError("material: lambda must be non-negative (Poisson ratio in [0, 1/2))");
}

QForm6 QForm6::from_matrix(const Mat6& Q) {
  const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw DomainError("material: Q matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat6> eig(0.5 * (Q + Q.transpose()));
  QForm6 out;
  out.Q = 0.5 * (Q + Q.transpose());
  out.c = eig.eigenvalues().minCoeff();
  out.C = eig.eigenvalues().maxCoeff();
  if (!(out.c > 0.0)) throw DomainError("material: Q matrix is not positive definite");
  return out;
}

double svk_density(const Mat3& F, const SvkMaterial& mat) {
  if (!(F.determinant() > 0.0)) return kInfiniteEnergy;
  const Mat3 D = F.transpose() * F - Mat3::Identity();
  const double tr = D.trace();
  return mat.lambda / 8.0 * tr * tr + mat.mu / 4.0 * (D * D).trace();
}

QForm6 isotropic_q6(const SvkMaterial& mat) {
  mat.validate();
  const double l = mat.lambda, m = mat.mu;
  Mat6 Q = Mat6::Zero();
  const int normal[3] = {0, 3, 5};
  for (int a : normal)
    for (int b : normal) Q(a, b) = (a == b) ? l + 2.0 * m : l;
  Q(1, 1) = Q(2, 2) = Q(4, 4) = 2.0 * m;
  return QForm6::from_matrix(Q);
}

Vec6 strain_vector(const Mat3& E) {
  Vec6 v;
  v << E(0, 0), E(0, 1), E(0, 2), E(1, 1), E(1, 2), E(2, 2);
  return v;
}

double q_of_strain(const Mat3& E, const QForm6& q, bool* symmetrized) {
  Mat3 S = E;
  const bool asym = (E - E.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, E.cwiseAbs().maxCoeff());
  if (asym) S = 0.5 * (E + E.transpose());
  if (symmetrized) *symmetrized = asym;
  const Vec6 v = strain_vector(S);
  return v.dot(q.Q * v);
}

}  // namespace rodlimit
