#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "rte/medium.hpp"
#include "rte/quadrature.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("gauss_legendre matches tabulated low-order rules") {
  const rte::QuadratureRule g2 = rte::gauss_legendre(2);
  CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2.weights[1] == doctest::Approx(1.0).epsilon(1e-14));

  const rte::QuadratureRule g3 = rte::gauss_legendre(3);
  CHECK(g3.nodes[1] == doctest::Approx(0.0));
  CHECK(g3.nodes[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-14));
  CHECK(g3.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  CHECK(g3.weights[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("gauss_legendre integrates high-degree polynomials exactly") {
  // q nodes are exact through degree 2q-1; check the edge of the range.
  for (int q : {5, 16, 64}) {
    const rte::QuadratureRule g = rte::gauss_legendre(q);
    const int deg = 2 * q - 1;
    double acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      acc += g.weights[i] * std::pow(g.nodes[i], deg);
    }
    CHECK(std::abs(acc) < 1e-12);  // odd power over [-1,1]
    acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      acc += g.weights[i] * std::pow(g.nodes[i], deg - 1);
    }
    CHECK(acc == doctest::Approx(2.0 / deg).epsilon(1e-12));
  }
}

TEST_CASE("gauss_legendre_01 weights sum to one") {
  for (int q : {1, 5, 64}) {
    const rte::QuadratureRule g = rte::gauss_legendre_01(q);
    double s = 0.0;
    for (double w : g.weights) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : g.nodes) {
      CHECK(x > 0.0);
      CHECK(x < 1.0);
    }
  }
}

TEST_CASE("integrate_1d reproduces closed-form integrals") {
  const double p = oracle::integrate_1d(
      [](double x) { return x * x * x; }, 0.0, 1.0);
  CHECK(p == doctest::Approx(0.25).epsilon(1e-13));

  const double e = oracle::integrate_1d(
      [](double x) { return std::exp(x); }, -1.0, 2.0);
  CHECK(e == doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-13));

  // A narrow peak forces actual subdivision.
  const double peak = oracle::integrate_1d(
      [](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
  const double ref = 2.0 / 1e-2 * std::atan(1.0 / 1e-2);
  CHECK(peak == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("optical_oracle matches the homogeneous closed form") {
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::Vec2 x{0.1, 0.2};
  const rte::Vec2 y{0.8, 0.9};
  const double len = (x - y).norm();
  CHECK(oracle::optical_oracle(m, x, y) ==
        doctest::Approx(std::exp(-1.2 * len)).epsilon(1e-13));
  CHECK(oracle::optical_oracle(m, x, x) == doctest::Approx(1.0));
}

TEST_CASE("diag_cell_oracle matches the vacuum closed form") {
  // With mu_t = 0 and unit weight the cell integral of 1/(2 pi r) over a
  // square of side h is (2h/pi) ln(1+sqrt(2)).
  const rte::Medium vac = rte::Medium::homogeneous(0.0, 0.0);
  const auto one = [](const rte::Vec2&) { return std::complex<double>{1.0}; };
  for (double h : {0.125, 0.03125}) {
    const std::complex<double> v =
        oracle::diag_cell_oracle(vac, {0.5, 0.5}, h, 0, one);
    const double ref = (2.0 * h / kPi) * std::log(1.0 + std::sqrt(2.0));
    CHECK(v.real() == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-15);
  }
}

TEST_CASE("diag_cell_oracle harmonics follow the square symmetry") {
  // e^{i d theta} over the square cancels unless d is a multiple of 4.
  const rte::Medium vac = rte::Medium::homogeneous(0.0, 0.0);
  const auto one = [](const rte::Vec2&) { return std::complex<double>{1.0}; };
  const double h = 0.0625;
  for (int d : {1, 2, 3}) {
    const std::complex<double> v =
        oracle::diag_cell_oracle(vac, {0.5, 0.5}, h, d, one);
    CHECK(std::abs(v) < 1e-13);
  }
  // d = 4 reduces to (h/pi) int_{-pi/4}^{pi/4} sec(t) cos(4t) dt.
  const std::complex<double> v4 =
      oracle::diag_cell_oracle(vac, {0.5, 0.5}, h, 4, one);
  const double ref4 = (h / kPi) * oracle::integrate_1d(
      [](double t) { return std::cos(4.0 * t) / std::cos(t); },
      -0.25 * kPi, 0.25 * kPi);
  CHECK(v4.real() == doctest::Approx(ref4).epsilon(1e-11));
  CHECK(std::abs(v4.imag()) < 1e-14);
}

TEST_CASE("diag_cell_oracle kills odd weights by symmetry") {
  const rte::Medium vac = rte::Medium::homogeneous(0.0, 0.0);
  const rte::Vec2 c{0.5, 0.5};
  const auto odd = [c](const rte::Vec2& y) {
    return std::complex<double>{y.x - c.x};
  };
  const std::complex<double> v = oracle::diag_cell_oracle(vac, c, 0.125, 0, odd);
  CHECK(std::abs(v) < 1e-15);
}
