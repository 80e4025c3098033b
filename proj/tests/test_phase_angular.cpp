#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "rte/angular.hpp"
#include "rte/errors.hpp"
#include "rte/medium.hpp"
#include "rte/phase.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("isotropic phase has delta coefficients") {
  const rte::PhaseFunction p = rte::PhaseFunction::isotropic();
  CHECK(p.x_independent());
  CHECK(p.sigma_hat({0.3, 0.7}, 0) == rte::Complex{1.0, 0.0});
  CHECK(p.sigma_hat({0.3, 0.7}, 1) == rte::Complex{0.0, 0.0});
  CHECK(p.sigma_hat({0.3, 0.7}, -5) == rte::Complex{0.0, 0.0});
  CHECK(p.sigma({0.3, 0.7}, 1.234) == doctest::Approx(1.0));
}

TEST_CASE("two-term phase coefficients and positivity limit") {
  const rte::PhaseFunction p = rte::PhaseFunction::two_term(0.2);
  CHECK(p.sigma_hat({0.1, 0.1}, 0) == rte::Complex{1.0, 0.0});
  CHECK(p.sigma_hat({0.1, 0.1}, 1).real() == doctest::Approx(0.2));
  CHECK(p.sigma_hat({0.1, 0.1}, -1).real() == doctest::Approx(0.2));
  CHECK(p.sigma_hat({0.1, 0.1}, 2) == rte::Complex{0.0, 0.0});
  CHECK(p.sigma({0.1, 0.1}, 0.0) == doctest::Approx(1.4));
  CHECK(p.sigma({0.1, 0.1}, kPi) == doctest::Approx(0.6));
  CHECK_THROWS_AS(rte::PhaseFunction::two_term(0.6), rte::InputError);
}

TEST_CASE("scaled forward phase matches its closed-form coefficients") {
  const double rho = 5.0;
  const rte::PhaseFunction p = rte::PhaseFunction::scaled_forward(rho);
  CHECK(!p.x_independent());
  const rte::Vec2 x{0.7, 0.4};
  const double g = std::exp(-(x - rte::Vec2{0.5, 0.5}).squared_norm() / 4.0);
  const double a = rho * g / (1.0 + 2.0 * rho * g);
  CHECK(p.sigma_hat(x, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.sigma_hat(x, 1).real() == doctest::Approx(a).epsilon(1e-13));
  CHECK(p.sigma_hat(x, -1).real() == doctest::Approx(a).epsilon(1e-13));
  // mu_s * sigma_hat(+-1) = rho * g when mu_s = 1 + 2 rho g.
  const double mu_s = 1.0 + 2.0 * rho * g;
  CHECK(mu_s * p.sigma_hat(x, 1).real() ==
        doctest::Approx(rho * g).epsilon(1e-13));
}

TEST_CASE("fourier_coefficient recovers band-limited coefficients") {
  // sigma(theta) = 1 + cos(theta) + 0.4 sin(2 theta):
  // sigma_hat(1) = 1/2, sigma_hat(2) = 0.4/(2i) = -0.2i.
  auto sigma = [](const rte::Vec2&, double t) {
    return 1.0 + std::cos(t) + 0.4 * std::sin(2.0 * t);
  };
  const rte::Vec2 x{0.2, 0.8};
  CHECK(rte::fourier_coefficient(sigma, x, 0, 64).real() ==
        doctest::Approx(1.0).epsilon(1e-13));
  const rte::Complex c1 = rte::fourier_coefficient(sigma, x, 1, 64);
  CHECK(c1.real() == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(c1.imag()) < 1e-13);
  const rte::Complex c2 = rte::fourier_coefficient(sigma, x, 2, 64);
  CHECK(std::abs(c2.real()) < 1e-13);
  CHECK(c2.imag() == doctest::Approx(-0.2).epsilon(1e-13));
  CHECK(std::abs(rte::fourier_coefficient(sigma, x, 3, 64)) < 1e-13);
}

TEST_CASE("from_callable agrees with analytic two-term coefficients") {
  auto sigma = [](const rte::Vec2&, double t) {
    return 1.0 + 0.4 * std::cos(t);
  };
  const rte::PhaseFunction p = rte::PhaseFunction::from_callable(sigma);
  const rte::PhaseFunction ref = rte::PhaseFunction::two_term(0.2);
  const rte::Vec2 x{0.6, 0.3};
  for (int k = -3; k <= 3; ++k) {
    CHECK(std::abs(p.sigma_hat(x, k) - ref.sigma_hat(x, k)) < 1e-13);
  }
}

TEST_CASE("mode sets sort, deduplicate, and require zero") {
  const rte::ModeSet m = rte::ModeSet::from_list({2, 0, -1, 2});
  CHECK(m.count() == 3);
  CHECK(m.modes() == std::vector<int>{-1, 0, 2});
  CHECK(m.index_of(0) == 1);
  CHECK(m.contains(2));
  CHECK(!m.contains(1));
  CHECK(!m.is_symmetric());
  CHECK_THROWS_AS(m.index_of(7), rte::InputError);
  CHECK_THROWS_AS(rte::ModeSet::from_list({1, 2}), rte::InputError);

  const rte::ModeSet s = rte::ModeSet::symmetric(2);
  CHECK(s.modes() == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(s.is_symmetric());
}

TEST_CASE("select_modes keeps exactly the active band") {
  const rte::PhaseFunction p = rte::PhaseFunction::two_term(0.2);
  const std::vector<rte::Vec2> probes{{0.5, 0.5}, {0.1, 0.9}};
  const rte::ModeSet m = rte::select_modes(p, probes, 1e-8);
  CHECK(m.modes() == std::vector<int>{-1, 0, 1});

  const rte::ModeSet iso =
      rte::select_modes(rte::PhaseFunction::isotropic(), probes, 1e-8);
  CHECK(iso.modes() == std::vector<int>{0});
}

TEST_CASE("modal solution layout is mode-blocked") {
  rte::ModalSolution sol(rte::Grid(2), rte::ModeSet::from_list({-1, 0, 1}));
  sol.at(3, 2) = {1.5, -0.5};
  CHECK(sol.data()[2 * 4 + 3] == rte::Complex{1.5, -0.5});
  sol.at(0, 1) = {2.0, 0.0};
  const std::vector<double> u = sol.mode0_real();
  CHECK(u.size() == 4);
  CHECK(u[0] == 2.0);
  // Nearest-cell lookup of mode +1 at a point in cell 3.
  CHECK(sol.value({0.9, 0.9}, 1) == rte::Complex{1.5, -0.5});
}

TEST_CASE("scattering_term reduces to mu_s times the mean density") {
  // Isotropic phase: S = mu_s * Phi_hat(x, 0).
  const rte::Grid g(2);
  const rte::Medium med = rte::Medium::homogeneous(2.0, 2.5);
  rte::ModalSolution sol(g, rte::ModeSet::from_list({0}));
  for (int i = 0; i < 4; ++i) sol.at(i, 0) = {0.25 * i, 0.0};
  const rte::PhaseFunction iso = rte::PhaseFunction::isotropic();
  const rte::Vec2 x = g.center(3);
  CHECK(rte::scattering_term(sol, med, iso, x, 1.0) ==
        doctest::Approx(2.0 * 0.75));
}

TEST_CASE("scattering_term applies the conjugate-symmetric mode sum") {
  const rte::Grid g(2);
  const rte::Medium med = rte::Medium::homogeneous(1.0, 1.2);
  const rte::PhaseFunction p = rte::PhaseFunction::two_term(0.2);
  rte::ModalSolution sol(g, rte::ModeSet::symmetric(1));
  const rte::Complex phi1{0.3, 0.1};
  for (int i = 0; i < 4; ++i) {
    sol.at(i, 1) = {1.0, 0.0};        // mode 0
    sol.at(i, 2) = phi1;              // mode +1
    sol.at(i, 0) = std::conj(phi1);   // mode -1
  }
  const double theta = 0.7;
  // S = mu_s * (phi0 + 0.2 * 2 Re(e^{i theta} phi1)).
  const double ref =
      1.0 + 0.2 * 2.0 * (std::cos(theta) * phi1.real() -
                         std::sin(theta) * phi1.imag());
  CHECK(rte::scattering_term(sol, med, p, g.center(0), theta) ==
        doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("reconstruct_flux integrates a source-free attenuated beam") {
  // Zero scattering solution and constant f = 1 in a homogeneous medium:
  // Phi(x,v) = int_0^tau e^{-mu_t s} ds = (1 - e^{-mu_t tau}) / mu_t.
  const rte::Grid g(4);
  const rte::Medium med = rte::Medium::homogeneous(0.0, 1.2);
  rte::ModalSolution sol(g, rte::ModeSet::from_list({0}));
  const rte::PhaseFunction iso = rte::PhaseFunction::isotropic();
  const auto f = [](const rte::Vec2&) { return 1.0; };
  const rte::Vec2 x{0.5, 0.5};
  const rte::Vec2 v{1.0, 0.0};
  const double tau = 0.5;
  const double ref = (1.0 - std::exp(-1.2 * tau)) / 1.2;
  CHECK(rte::reconstruct_flux(sol, med, iso, f, x, v, 16) ==
        doctest::Approx(ref).epsilon(1e-10));
}
