#pragma once

// Point kernels of the integral formulation and the singular quadratures for
// the diagonal (self-cell) Nystrom entries.
//
//   ktilde(x,y) = E(x,y) / (2*pi*|x-y|)
//   kiso(x,y)   = mu_s(y) * ktilde(x,y)
//
// and their angular-mode counterparts carrying the phase e^{i(k'-k)*theta}
// with theta the polar angle of x - y.

#include <complex>
#include <functional>

#include "rte/geometry.hpp"
#include "rte/medium.hpp"
#include "rte/quadrature.hpp"

namespace rte {

using Complex = std::complex<double>;

// sigma_hat(x, k): k-th Fourier coefficient of the scattering phase function
// at position x. Provided by the angular module; the kernel only consumes it.
using SigmaHatFn = std::function<Complex(const Vec2&, int)>;

struct KernelConfig {
  // Gauss-Legendre nodes for the optical-depth line integral in E.
  int line_nodes = 5;
  // Per-axis / per-triangle tensor Gauss-Legendre size for diagonal cells.
  // Odd counts place a node on the removable singularity; the analytic limit
  // is substituted there.
  int diag_nodes = 15;
  // Diagonal rule for the isotropic kernels. Default: polar triangle rule,
  // whose area Jacobian cancels the 1/r factor and leaves a smooth integrand
  // (near machine precision at the default node count). Alternative: analytic
  // integral of the 1/(2*pi*r) part plus a tensor rule on the remainder; the
  // remainder has a directional kink at the center, capping that rule near
  // 1e-8, so it serves as an independent cross-check only.
  bool diag_analytic_split = false;
};

class KernelEvaluator {
 public:
  explicit KernelEvaluator(const Medium& m, KernelConfig cfg = {});

  const Medium& medium() const { return *medium_; }
  const KernelConfig& config() const { return cfg_; }

  double optical(const Vec2& x, const Vec2& y) const {
    return optical_factor(*medium_, line_rule_, x, y);
  }

  // Point kernels; require x != y.
  double ktilde(const Vec2& x, const Vec2& y) const;
  double kiso(const Vec2& x, const Vec2& y) const;
  Complex ktilde_aniso(const Vec2& x, int k, const Vec2& y, int kp) const;
  Complex kaniso(const Vec2& x, int k, const Vec2& y, int kp,
                 const SigmaHatFn& sigma_hat) const;

  // Integrals over the cell of side h centered at c of the kernel with first
  // argument frozen at c: int_cell ktilde(c, y) dy, etc. These are the
  // diagonal Nystrom entries (no extra h^2 factor).
  double diag_ktilde(const Vec2& c, double h) const;
  double diag_kiso(const Vec2& c, double h) const;
  Complex diag_ktilde_aniso(const Vec2& c, double h, int k, int kp) const;
  Complex diag_kaniso(const Vec2& c, double h, int k, int kp,
                      const SigmaHatFn& sigma_hat) const;

 private:
  // Split rule for int_cell W(y)*E(c,y)/(2*pi*|y-c|) dy with W smooth:
  // W(c) * (analytic 1/(2*pi*r) cell integral) + tensor rule on
  // (W(y)E - W(c))/(2*pi*r), center node filled with -W(c)*mu_t(c)/(2*pi).
  Complex diag_split(const Vec2& c, double h,
                     const std::function<Complex(const Vec2&)>& weight) const;
  // Polar rule over the 4 triangles; the r-Jacobian cancels the 1/r factor,
  // so the integrand is smooth. mode_diff enters as e^{i*mode_diff*phi} with
  // phi the angle of c - y.
  Complex diag_polar(const Vec2& c, double h, int mode_diff,
                     const std::function<Complex(const Vec2&)>& weight) const;

  const Medium* medium_;
  KernelConfig cfg_;
  QuadratureRule line_rule_;   // [0,1], weights sum to 1
  QuadratureRule diag_rule_;   // [-1,1] tensor factor
};

}  // namespace rte
