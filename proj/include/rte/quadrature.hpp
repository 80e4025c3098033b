#pragma once

#include <vector>

namespace rte {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with q nodes on [-1,1]. Exact for polynomials of
// degree <= 2q-1.
QuadratureRule gauss_legendre(int q);

// The same rule mapped to [0,1]; weights sum to 1.
QuadratureRule gauss_legendre_01(int q);

}  // namespace rte
