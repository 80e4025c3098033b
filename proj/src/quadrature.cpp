#include "rte/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rte {

QuadratureRule gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("gauss_legendre: q must be >= 1");
  QuadratureRule r;
  r.nodes.resize(static_cast<size_t>(q));
  r.weights.resize(static_cast<size_t>(q));

  // Newton iteration from the Chebyshev-like initial guess; the three-term
  // recurrence gives P_q and P_q'. Nodes come out in decreasing order of the
  // initial guess, so fill symmetric pairs explicitly.
  const int m = (q + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      // p0 = P_q(z); derivative from P_q and P_{q-1}.
      pp = q * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.nodes[static_cast<size_t>(i)] = -z;
    r.nodes[static_cast<size_t>(q - 1 - i)] = z;
    r.weights[static_cast<size_t>(i)] = w;
    r.weights[static_cast<size_t>(q - 1 - i)] = w;
  }
  return r;
}

QuadratureRule gauss_legendre_01(int q) {
  QuadratureRule r = gauss_legendre(q);
  for (size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = 0.5 * (r.nodes[i] + 1.0);
    r.weights[i] *= 0.5;
  }
  return r;
}

}  // namespace rte
