#include "rte/angular.hpp"

#include <algorithm>
#include <cmath>

#include "rte/quadrature.hpp"

namespace rte {

ModeSet ModeSet::from_list(std::vector<int> modes) {
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  if (!std::binary_search(modes.begin(), modes.end(), 0)) {
    throw InputError("ModeSet: 0 must be a member");
  }
  ModeSet s;
  s.modes_ = std::move(modes);
  return s;
}

ModeSet ModeSet::symmetric(int kmax) {
  if (kmax < 0) throw InputError("ModeSet: kmax must be >= 0");
  std::vector<int> m;
  for (int k = -kmax; k <= kmax; ++k) m.push_back(k);
  return from_list(std::move(m));
}

bool ModeSet::contains(int k) const {
  return std::binary_search(modes_.begin(), modes_.end(), k);
}

int ModeSet::index_of(int k) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), k);
  if (it == modes_.end() || *it != k) {
    throw InputError("ModeSet: mode " + std::to_string(k) + " not in set");
  }
  return static_cast<int>(it - modes_.begin());
}

bool ModeSet::is_symmetric() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [this](int k) { return contains(-k); });
}

Complex fourier_sigma(const PhaseFunction& phase, const Vec2& x, int k,
                      int n_theta) {
  if (phase.has_callable()) {
    return fourier_coefficient(
        [&phase](const Vec2& p, double th) { return phase.sigma(p, th); }, x,
        k, n_theta);
  }
  return phase.sigma_hat(x, k);
}

ModeSet select_modes(const PhaseFunction& phase,
                     const std::vector<Vec2>& probes, double threshold,
                     int max_bandwidth) {
  if (threshold < 0.0) throw InputError("select_modes: threshold must be >= 0");
  std::vector<int> keep{0};
  for (int k = -max_bandwidth; k <= max_bandwidth; ++k) {
    if (k == 0) continue;
    double sup = 0.0;
    for (const Vec2& x : probes) {
      sup = std::max(sup, std::abs(phase.sigma_hat(x, k)));
    }
    if (sup > threshold) keep.push_back(k);
  }
  return ModeSet::from_list(std::move(keep));
}

ModalSolution::ModalSolution(Grid grid, ModeSet modes)
    : grid_(std::move(grid)), modes_(std::move(modes)) {
  data_.assign(static_cast<size_t>(grid_.size()) * modes_.count(),
               Complex{0.0, 0.0});
}

Complex ModalSolution::value(const Vec2& p, int k) const {
  return at(grid_.cell_of(p), modes_.index_of(k));
}

std::vector<double> ModalSolution::mode0_real() const {
  const int m0 = modes_.index_of(0);
  std::vector<double> u(static_cast<size_t>(grid_.size()));
  for (int i = 0; i < grid_.size(); ++i) u[static_cast<size_t>(i)] = at(i, m0).real();
  return u;
}

double scattering_term(const ModalSolution& modal, const Medium& medium,
                       const PhaseFunction& phase, const Vec2& x,
                       double theta_v, double imag_tol) {
  const int cell = modal.grid().cell_of(x);
  Complex acc{0.0, 0.0};
  for (int m = 0; m < modal.modes().count(); ++m) {
    const int k = modal.modes().mode(m);
    acc += std::polar(1.0, k * theta_v) * phase.sigma_hat(x, k) *
           modal.at(cell, m);
  }
  acc *= medium.mu_s(x);
  if (std::abs(acc.imag()) > imag_tol * (1.0 + std::abs(acc.real()))) {
    throw ConsistencyError(
        "scattering_term: imaginary residual " + std::to_string(acc.imag()) +
        " exceeds tolerance (broken conjugate symmetry?)");
  }
  return acc.real();
}

double reconstruct_flux(const ModalSolution& modal, const Medium& medium,
                        const PhaseFunction& phase, const ScalarField& f,
                        const Vec2& x, const Vec2& v, int n_panels,
                        double imag_tol) {
  if (n_panels < 1) throw InputError("reconstruct_flux: n_panels must be >= 1");
  const double tau = exit_distance(x, v);
  const double theta_v = std::atan2(v.y, v.x);
  static const QuadratureRule gl = gauss_legendre(4);

  // depth_to holds int_0^{s_panel} mu_t along the ray, accumulated panel by
  // panel with the same 4-node rule, so constant mu_t is handled exactly.
  auto mu_t_at = [&](double s) { return medium.mu_t(x - s * v); };
  auto panel_integral = [&](double a, double b) {
    double acc = 0.0;
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      acc += 0.5 * (b - a) * gl.weights[i] * mu_t_at(s);
    }
    return acc;
  };

  const double ds = tau / n_panels;
  double flux = 0.0;
  double depth_to = 0.0;
  for (int p = 0; p < n_panels; ++p) {
    const double a = p * ds, b = a + ds;
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      const double w = 0.5 * (b - a) * gl.weights[i];
      const Vec2 y = x - s * v;
      const double depth = depth_to + panel_integral(a, s);
      const double src =
          scattering_term(modal, medium, phase, y, theta_v, imag_tol) + f(y);
      flux += w * std::exp(-depth) * src;
    }
    depth_to += panel_integral(a, b);
  }
  return flux;
}

}  // namespace rte
