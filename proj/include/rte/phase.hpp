#pragma once

// Scattering phase function sigma(x, theta) with the averaged-circle
// normalization (1/2pi) int_0^{2pi} sigma(x,theta) dtheta = 1, represented
// either analytically or through its Fourier coefficients
//
//   sigma_hat(x,k) = (1/2pi) int_0^{2pi} sigma(x,theta) e^{-i k theta} dtheta.

#include <complex>
#include <functional>

#include "rte/geometry.hpp"

namespace rte {

using Complex = std::complex<double>;

// Periodic trapezoid rule for sigma_hat; spectrally accurate for smooth
// sigma, exact for band-limited sigma once n_theta exceeds twice the
// bandwidth. n_theta is raised to 4|k|+4 if below.
Complex fourier_coefficient(
    const std::function<double(const Vec2&, double)>& sigma, const Vec2& x,
    int k, int n_theta);

class PhaseFunction {
 public:
  // sigma == 1: sigma_hat(k) = delta_{k,0}.
  static PhaseFunction isotropic();
  // sigma(theta) = 1 + 2a*cos(theta): sigma_hat(+-1) = a. Requires |a| <= 1/2
  // so sigma stays nonnegative.
  static PhaseFunction two_term(double a);
  // Position-dependent forward-peaked profile with
  //   sigma_hat(x,+-1) = rho*g(x) / (1 + 2*rho*g(x)),  g = exp(-|x-c|^2/4),
  // c = (1/2,1/2); pairs with mu_s(x) = 1 + 2*rho*g(x) so that
  // mu_s*sigma = 1 + (2 + e^{i theta} + e^{-i theta})*rho*g.
  static PhaseFunction scaled_forward(double rho);
  static PhaseFunction from_callable(
      std::function<double(const Vec2&, double)> sigma, int n_theta = 256);
  // Analytic coefficients; optional callable for direct sigma evaluation.
  static PhaseFunction from_coefficients(
      std::function<Complex(const Vec2&, int)> coeffs,
      std::function<double(const Vec2&, double)> sigma = nullptr);

  Complex sigma_hat(const Vec2& x, int k) const;
  // Callable access to sigma itself; only when an analytic form is attached.
  bool has_callable() const { return static_cast<bool>(sigma_); }
  double sigma(const Vec2& x, double theta) const;

  // Coefficients independent of x (homogeneous phase); enables the constant
  // per-mode caching used by the FFT backend.
  bool x_independent() const { return x_independent_; }

  std::function<Complex(const Vec2&, int)> sigma_hat_fn() const;

 private:
  PhaseFunction() = default;
  void check_normalization() const;

  std::function<Complex(const Vec2&, int)> coeffs_;
  std::function<double(const Vec2&, double)> sigma_;
  bool x_independent_ = false;
  int n_theta_ = 256;
};

}  // namespace rte
