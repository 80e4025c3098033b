#include "rte/phase.hpp"

#include <cmath>

namespace rte {

Complex fourier_coefficient(
    const std::function<double(const Vec2&, double)>& sigma, const Vec2& x,
    int k, int n_theta) {
  const int n = std::max(n_theta, 4 * std::abs(k) + 4);
  Complex acc{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * M_PI * j / n;
    acc += sigma(x, th) * std::polar(1.0, -k * th);
  }
  return acc / static_cast<double>(n);
}

PhaseFunction PhaseFunction::isotropic() {
  PhaseFunction p;
  p.coeffs_ = [](const Vec2&, int k) {
    return k == 0 ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
  };
  p.sigma_ = [](const Vec2&, double) { return 1.0; };
  p.x_independent_ = true;
  return p;
}

PhaseFunction PhaseFunction::two_term(double a) {
  if (std::abs(a) > 0.5) {
    throw InputError("PhaseFunction::two_term: |a| <= 1/2 required for sigma >= 0");
  }
  PhaseFunction p;
  p.coeffs_ = [a](const Vec2&, int k) {
    if (k == 0) return Complex(1.0, 0.0);
    if (k == 1 || k == -1) return Complex(a, 0.0);
    return Complex(0.0, 0.0);
  };
  p.sigma_ = [a](const Vec2&, double th) { return 1.0 + 2.0 * a * std::cos(th); };
  p.x_independent_ = true;
  return p;
}

PhaseFunction PhaseFunction::scaled_forward(double rho) {
  if (rho < 0.0) throw InputError("PhaseFunction::scaled_forward: rho >= 0");
  const Vec2 c{0.5, 0.5};
  auto w = [rho, c](const Vec2& x) {
    const double g = std::exp(-(x - c).squared_norm() / 4.0);
    return rho * g / (1.0 + 2.0 * rho * g);
  };
  PhaseFunction p;
  p.coeffs_ = [w](const Vec2& x, int k) {
    if (k == 0) return Complex(1.0, 0.0);
    if (k == 1 || k == -1) return Complex(w(x), 0.0);
    return Complex(0.0, 0.0);
  };
  p.sigma_ = [w](const Vec2& x, double th) {
    return 1.0 + 2.0 * w(x) * std::cos(th);
  };
  p.x_independent_ = (rho == 0.0);
  return p;
}

PhaseFunction PhaseFunction::from_callable(
    std::function<double(const Vec2&, double)> sigma, int n_theta) {
  if (n_theta < 4) throw InputError("PhaseFunction: n_theta must be >= 4");
  PhaseFunction p;
  p.sigma_ = std::move(sigma);
  p.n_theta_ = n_theta;
  p.coeffs_ = [s = p.sigma_, n_theta](const Vec2& x, int k) {
    return fourier_coefficient(s, x, k, n_theta);
  };
  p.check_normalization();
  return p;
}

PhaseFunction PhaseFunction::from_coefficients(
    std::function<Complex(const Vec2&, int)> coeffs,
    std::function<double(const Vec2&, double)> sigma) {
  PhaseFunction p;
  p.coeffs_ = std::move(coeffs);
  p.sigma_ = std::move(sigma);
  p.check_normalization();
  return p;
}

void PhaseFunction::check_normalization() const {
  // sigma_hat(x,0) = 1 and, when sigma is callable, sigma >= 0 (spot check).
  const Vec2 probes[] = {{0.25, 0.25}, {0.5, 0.5}, {0.9, 0.1}};
  for (const Vec2& x : probes) {
    const Complex c0 = coeffs_(x, 0);
    if (std::abs(c0 - Complex(1.0, 0.0)) > 1e-8) {
      throw InputError("PhaseFunction: sigma_hat(x,0) must equal 1");
    }
    if (sigma_) {
      for (int j = 0; j < 32; ++j) {
        if (sigma_(x, 2.0 * M_PI * j / 32.0) < -1e-12) {
          throw InputError("PhaseFunction: sigma(x,theta) must be nonnegative");
        }
      }
    }
  }
}

Complex PhaseFunction::sigma_hat(const Vec2& x, int k) const {
  return coeffs_(x, k);
}

double PhaseFunction::sigma(const Vec2& x, double theta) const {
  if (!sigma_) {
    throw InputError("PhaseFunction: no analytic sigma attached");
  }
  return sigma_(x, theta);
}

std::function<Complex(const Vec2&, int)> PhaseFunction::sigma_hat_fn() const {
  return coeffs_;
}

}  // namespace rte
