#include "rte/kernel.hpp"

#include <cmath>

namespace rte {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
// int_{[-h/2,h/2]^2} 1/(2*pi*|y|) dy = (2h/pi) * asinh(1).
constexpr double kLog1pSqrt2 = 0.88137358701954302523;  // asinh(1)
}  // namespace

KernelEvaluator::KernelEvaluator(const Medium& m, KernelConfig cfg)
    : medium_(&m), cfg_(cfg) {
  if (cfg_.line_nodes < 1 || cfg_.diag_nodes < 1) {
    throw InputError("KernelEvaluator: quadrature sizes must be >= 1");
  }
  line_rule_ = gauss_legendre_01(cfg_.line_nodes);
  diag_rule_ = gauss_legendre(cfg_.diag_nodes);
  // Pin the middle node of odd rules to exactly 0 so the removable
  // singularity of the diagonal remainder is hit exactly and the analytic
  // limit can be substituted. Newton leaves it at ~1e-16 otherwise, which
  // would put a catastrophically cancelled sample right next to r = 0.
  if (cfg_.diag_nodes % 2 == 1) {
    diag_rule_.nodes[static_cast<size_t>(cfg_.diag_nodes / 2)] = 0.0;
  }
}

double KernelEvaluator::ktilde(const Vec2& x, const Vec2& y) const {
  const double r = (x - y).norm();
  if (r == 0.0) throw InputError("ktilde: requires x != y");
  return optical(x, y) / (kTwoPi * r);
}

double KernelEvaluator::kiso(const Vec2& x, const Vec2& y) const {
  return medium_->mu_s(y) * ktilde(x, y);
}

Complex KernelEvaluator::ktilde_aniso(const Vec2& x, int k, const Vec2& y,
                                      int kp) const {
  const double kt = ktilde(x, y);
  if (k == kp) return Complex(kt, 0.0);
  return kt * std::polar(1.0, (kp - k) * angle_between(x, y));
}

Complex KernelEvaluator::kaniso(const Vec2& x, int k, const Vec2& y, int kp,
                                const SigmaHatFn& sigma_hat) const {
  const double ks = kiso(x, y);
  const Complex sh = sigma_hat(y, kp);
  if (k == kp) return ks * sh;
  return ks * sh * std::polar(1.0, (kp - k) * angle_between(x, y));
}

Complex KernelEvaluator::diag_split(
    const Vec2& c, double h,
    const std::function<Complex(const Vec2&)>& weight) const {
  const Complex wc = weight(c);
  const double mtc = medium_->mu_t(c);
  // Analytic integral of the 1/(2*pi*r) factor over the cell.
  Complex acc = wc * (2.0 * h / M_PI) * kLog1pSqrt2;
  // Tensor rule on (W(y)E(c,y) - W(c)) / (2*pi*r); the limit at y = c is
  // -W(c)*mu_t(c)/(2*pi).
  const double a = 0.5 * h;
  const auto& q = diag_rule_;
  for (size_t j = 0; j < q.nodes.size(); ++j) {
    for (size_t i = 0; i < q.nodes.size(); ++i) {
      const double w2 = q.weights[i] * q.weights[j] * a * a;
      const Vec2 y{c.x + a * q.nodes[i], c.y + a * q.nodes[j]};
      const double r = (y - c).norm();
      Complex val;
      if (r <= 1e-13 * h) {
        val = -wc * mtc / kTwoPi;
      } else {
        val = (weight(y) * optical(c, y) - wc) / (kTwoPi * r);
      }
      acc += w2 * val;
    }
  }
  return acc;
}

Complex KernelEvaluator::diag_polar(
    const Vec2& c, double h, int mode_diff,
    const std::function<Complex(const Vec2&)>& weight) const {
  // Four triangles; triangle m spans phi in [m*pi/2 - pi/4, m*pi/2 + pi/4]
  // with outer radius (h/2)/cos(phi - m*pi/2). The polar Jacobian cancels
  // the 1/r of the kernel, so the integrand E*W*e^{i*mode_diff*phi}/(2*pi)
  // is smooth. phi is the angle of c - y, i.e. y = c - r*(cos phi, sin phi).
  const auto& q = diag_rule_;
  Complex acc{0.0, 0.0};
  for (int m = 0; m < 4; ++m) {
    const double phi0 = m * M_PI_2;
    for (size_t a = 0; a < q.nodes.size(); ++a) {
      const double phi = phi0 + M_PI_4 * q.nodes[a];
      const double wphi = M_PI_4 * q.weights[a];
      const double rmax = (0.5 * h) / std::cos(phi - phi0);
      const Complex ph = mode_diff == 0
                             ? Complex(1.0, 0.0)
                             : std::polar(1.0, mode_diff * phi);
      const Vec2 u{std::cos(phi), std::sin(phi)};
      for (size_t b = 0; b < q.nodes.size(); ++b) {
        const double r = 0.5 * rmax * (q.nodes[b] + 1.0);
        const double wr = 0.5 * rmax * q.weights[b];
        const Vec2 y = c - r * u;
        acc += (wphi * wr / kTwoPi) * optical(c, y) * weight(y) * ph;
      }
    }
  }
  return acc;
}

double KernelEvaluator::diag_ktilde(const Vec2& c, double h) const {
  auto one = [](const Vec2&) { return Complex(1.0, 0.0); };
  return cfg_.diag_analytic_split ? diag_split(c, h, one).real()
                                  : diag_polar(c, h, 0, one).real();
}

double KernelEvaluator::diag_kiso(const Vec2& c, double h) const {
  auto w = [this](const Vec2& y) { return Complex(medium_->mu_s(y), 0.0); };
  return cfg_.diag_analytic_split ? diag_split(c, h, w).real()
                                  : diag_polar(c, h, 0, w).real();
}

Complex KernelEvaluator::diag_ktilde_aniso(const Vec2& c, double h, int k,
                                           int kp) const {
  auto one = [](const Vec2&) { return Complex(1.0, 0.0); };
  if (k == kp) return Complex(diag_ktilde(c, h), 0.0);
  return diag_polar(c, h, kp - k, one);
}

Complex KernelEvaluator::diag_kaniso(const Vec2& c, double h, int k, int kp,
                                     const SigmaHatFn& sigma_hat) const {
  auto w = [this, kp, &sigma_hat](const Vec2& y) {
    return Complex(medium_->mu_s(y), 0.0) * sigma_hat(y, kp);
  };
  if (k == kp) {
    return cfg_.diag_analytic_split ? diag_split(c, h, w)
                                    : diag_polar(c, h, 0, w);
  }
  return diag_polar(c, h, kp - k, w);
}

}  // namespace rte
