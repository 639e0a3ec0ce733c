#pragma once

#include <vector>

namespace rodlimit {

struct GaussRule {
  std::vector<double> x, w;
};

// Gauss-Legendre rule with n points on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace rodlimit
