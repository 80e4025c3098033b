#pragma once

// Independent reference integrators for the quadrature tests. These are
// written against the definitions only (no shared code with the library's
// fixed-order rules beyond the Gauss-Legendre node generator, which is
// itself validated against closed forms) and use adaptive bisection with a
// 32-vs-64 node error estimate.

#include <cmath>
#include <complex>
#include <functional>

#include "rte/geometry.hpp"
#include "rte/medium.hpp"
#include "rte/quadrature.hpp"

namespace oracle {

template <class T>
T panel_sum(const std::function<T(double)>& f, double a, double b,
            const rte::QuadratureRule& rule) {
  const double mid = 0.5 * (a + b);
  const double hal = 0.5 * (b - a);
  T acc{};
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    acc += rule.weights[q] * f(mid + hal * rule.nodes[q]);
  }
  return hal * acc;
}

template <class T>
T integrate_adaptive(const std::function<T(double)>& f, double a, double b,
                     double tol, int depth = 0) {
  static const rte::QuadratureRule rule32 = rte::gauss_legendre(32);
  static const rte::QuadratureRule rule64 = rte::gauss_legendre(64);
  const T coarse = panel_sum(f, a, b, rule32);
  const T fine = panel_sum(f, a, b, rule64);
  if (std::abs(fine - coarse) <= tol * std::max(1.0, std::abs(fine)) ||
      depth >= 24) {
    return fine;
  }
  const double mid = 0.5 * (a + b);
  return integrate_adaptive(f, a, mid, 0.5 * tol, depth + 1) +
         integrate_adaptive(f, mid, b, 0.5 * tol, depth + 1);
}

inline double integrate_1d(const std::function<double(double)>& f, double a,
                           double b, double tol = 1e-13) {
  return integrate_adaptive<double>(f, a, b, tol);
}

// E(x,y) with the optical depth integrated adaptively.
inline double optical_oracle(const rte::Medium& m, const rte::Vec2& x,
                             const rte::Vec2& y, double tol = 1e-13) {
  const rte::Vec2 d = x - y;
  const double len = d.norm();
  if (len == 0.0) return 1.0;
  const double depth = integrate_1d(
      [&](double s) { return m.mu_t(x - s * d); }, 0.0, 1.0, tol);
  return std::exp(-len * depth);
}

// int over the cell of side h centered at c of
//   W(y) E(c,y) e^{i d theta(x-y)} / (2 pi |c-y|) dy
// in polar coordinates over the four boundary triangles; the area Jacobian
// cancels the 1/r singularity, and both the radial and angular integrals are
// adaptive.
inline std::complex<double> diag_cell_oracle(
    const rte::Medium& m, const rte::Vec2& c, double h, int d,
    const std::function<std::complex<double>(const rte::Vec2&)>& weight,
    double tol = 1e-12) {
  using C = std::complex<double>;
  constexpr double kPi = 3.14159265358979323846;
  const double inv2pi = 1.0 / (2.0 * kPi);
  C total{};
  for (int tri = 0; tri < 4; ++tri) {
    const double phi_mid = tri * 0.5 * kPi;
    const std::function<C(double)> outer = [&](double phi) -> C {
      const double rmax = (0.5 * h) / std::cos(phi - phi_mid);
      const rte::Vec2 dir{std::cos(phi), std::sin(phi)};
      const std::function<C(double)> inner = [&](double r) -> C {
        const rte::Vec2 y = c + r * dir;
        const double theta = rte::angle_between(c, y);
        return weight(y) * optical_oracle(m, c, y, 0.1 * tol) *
               std::polar(1.0, d * theta) * inv2pi;
      };
      return integrate_adaptive<C>(inner, 0.0, rmax, 0.5 * tol);
    };
    total += integrate_adaptive<C>(outer, phi_mid - 0.25 * kPi,
                                   phi_mid + 0.25 * kPi, 0.5 * tol);
  }
  return total;
}

}  // namespace oracle
