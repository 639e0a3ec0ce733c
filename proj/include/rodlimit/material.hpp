#pragma once

#include "rodlimit/types.hpp"

#include <limits>

namespace rodlimit {

struct SvkMaterial {
  double lambda = 1.0;
  double mu = 1.0;

  double young() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
  double poisson() const { return lambda / (2.0 * (lambda + mu)); }
  // Throws DomainError unless mu > 0 and lambda >= 0.
  void validate() const;
};

// Strain 6-vectors are ordered (E11, E12, E13, E22, E23, E33), off-diagonal
// entries stored once.
struct QForm6 {
  Mat6 Q = Mat6::Identity();
  double c = 1.0;  // smallest eigenvalue
  double C = 1.0;  // largest eigenvalue

  // Validates symmetry and positive definiteness.
  static QForm6 from_matrix(const Mat6& Q);
};

inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();

double svk_density(const Mat3& F, const SvkMaterial& mat);

QForm6 isotropic_q6(const SvkMaterial& mat);

Vec6 strain_vector(const Mat3& E);

// v.Qv; a non-symmetric E is replaced by its symmetric part and the flag set.
double q_of_strain(const Mat3& E, const QForm6& q, bool* symmetrized = nullptr);

}  // namespace rodlimit
