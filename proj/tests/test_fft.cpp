#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rte/dense.hpp"
#include "rte/errors.hpp"
#include "rte/fft_solver.hpp"
#include "rte/sources.hpp"

namespace {

std::vector<double> random_field(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = uni(rng);
  return v;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("fft apply reproduces dense Ktilde columns exactly") {
  const rte::Grid g(8);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::DenseSystem dense = rte::DenseSystem::assemble_iso(g, m);
  const rte::CirculantSymbol sym = rte::CirculantSymbol::build_iso(g, m);

  // One-hot probes recover matrix columns; FFT roundoff is the only error.
  for (int j : {0, 27, 63}) {
    std::vector<double> e(static_cast<size_t>(g.size()), 0.0);
    e[static_cast<size_t>(j)] = 1.0;
    const std::vector<double> col = sym.apply(e);
    for (int i = 0; i < g.size(); ++i) {
      CHECK(col[static_cast<size_t>(i)] ==
            doctest::Approx(dense.ktilde()(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("fft apply matches dense on random vectors") {
  const rte::Grid g(8);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::DenseSystem dense = rte::DenseSystem::assemble_iso(g, m);
  const rte::CirculantSymbol sym = rte::CirculantSymbol::build_iso(g, m);
  const std::vector<double> v = random_field(g.size(), 77);
  const std::vector<double> fast = sym.apply(v);
  const Eigen::Map<const Eigen::VectorXd> vv(v.data(), g.size());
  const Eigen::VectorXd ref = dense.ktilde() * vv;
  for (int i = 0; i < g.size(); ++i) {
    CHECK(fast[static_cast<size_t>(i)] ==
          doctest::Approx(ref(i)).epsilon(1e-12));
  }
}

TEST_CASE("plain-K symbol carries the mu_s weight") {
  const rte::Grid g(8);
  const rte::Medium m = rte::Medium::homogeneous(2.0, 2.3);
  const rte::DenseSystem dense = rte::DenseSystem::assemble_iso(g, m);
  const rte::CirculantSymbol sym =
      rte::CirculantSymbol::build_iso(g, m, {}, /*plain_k=*/true);
  CHECK(sym.variant() == rte::SymbolVariant::KIso);
  const std::vector<double> v = random_field(g.size(), 78);
  const std::vector<double> fast = sym.apply(v);
  const Eigen::Map<const Eigen::VectorXd> vv(v.data(), g.size());
  const Eigen::VectorXd ref = dense.kmatrix() * vv;
  for (int i = 0; i < g.size(); ++i) {
    CHECK(fast[static_cast<size_t>(i)] ==
          doctest::Approx(ref(i)).epsilon(1e-12));
  }
}

TEST_CASE("fft solve agrees with the dense oracle within 10 eps") {
  const rte::Grid g(16);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::DenseSystem dense = rte::DenseSystem::assemble_iso(g, m);
  const rte::CirculantSymbol sym = rte::CirculantSymbol::build_iso(g, m);
  for (int src : {1, 2, 3}) {
    const std::vector<double> f = rte::make_source(src, g);
    const rte::DenseSolveResult ref = dense.solve(f);
    for (double eps : {1e-4, 1e-8}) {
      rte::KrylovConfig cfg;
      cfg.tol = eps;
      const rte::FftSolveResult fast = rte::solve_fft(sym, m, f, cfg);
      CHECK(fast.stats.converged);
      CHECK(rel_err(fast.u, ref.u) <= 10.0 * eps);
    }
  }
}

TEST_CASE("variable mu_s with constant mu_t stays exact") {
  // KtildeIso only requires translation invariance of mu_t; mu_s enters the
  // solve through the diagonal.
  const rte::Grid g(12);
  const rte::Medium m = rte::Medium::from_fields(
      [](const rte::Vec2& p) { return 1.0 + 0.5 * p.x; },
      [](const rte::Vec2&) { return 2.0; });
  const rte::DenseSystem dense = rte::DenseSystem::assemble_iso(g, m);
  const rte::CirculantSymbol sym = rte::CirculantSymbol::build_iso(g, m);
  const std::vector<double> f = rte::make_source(1, g);
  const rte::DenseSolveResult ref = dense.solve(f);
  rte::KrylovConfig cfg;
  cfg.tol = 1e-10;
  const rte::FftSolveResult fast = rte::solve_fft(sym, m, f, cfg);
  CHECK(fast.stats.converged);
  CHECK(rel_err(fast.u, ref.u) <= 1e-8);
}

TEST_CASE("symbol construction rejects variable mu_t") {
  const rte::Grid g(8);
  const rte::Medium bump = rte::Medium::gaussian_bump(1.0, 0.2);
  CHECK_THROWS_AS(rte::CirculantSymbol::build_iso(g, bump), rte::InputError);
}

TEST_CASE("anisotropic fft apply matches the dense modal matrix") {
  const rte::Grid g(6);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::PhaseFunction phase = rte::PhaseFunction::two_term(0.2);
  const rte::ModeSet modes = rte::ModeSet::symmetric(1);
  const rte::DenseSystem dense =
      rte::DenseSystem::assemble_aniso(g, m, phase, modes);
  const rte::CirculantSymbol sym =
      rte::CirculantSymbol::build_aniso(g, m, phase, modes);
  CHECK(sym.variant() == rte::SymbolVariant::Aniso);

  const int rows = g.size() * modes.count();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<rte::Complex> v(static_cast<size_t>(rows));
  for (auto& c : v) c = {uni(rng), uni(rng)};
  const std::vector<rte::Complex> fast = sym.apply(v);
  const Eigen::Map<const Eigen::VectorXcd> vv(v.data(), rows);
  const Eigen::VectorXcd ref = dense.kmatrix_aniso() * vv;
  double worst = 0.0;
  for (int i = 0; i < rows; ++i) {
    worst = std::max(worst, std::abs(fast[static_cast<size_t>(i)] - ref(i)));
  }
  CHECK(worst < 1e-12 * ref.norm());
}

TEST_CASE("anisotropic fft solve tracks the dense modal solution") {
  const rte::Grid g(8);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::PhaseFunction phase = rte::PhaseFunction::two_term(0.2);
  const rte::ModeSet modes = rte::ModeSet::symmetric(1);
  const rte::DenseSystem dense =
      rte::DenseSystem::assemble_aniso(g, m, phase, modes);
  const rte::CirculantSymbol sym =
      rte::CirculantSymbol::build_aniso(g, m, phase, modes);
  const std::vector<double> f = rte::make_source(1, g);
  const rte::ModalSolution ref = dense.solve_modal(f);

  rte::KrylovConfig cfg;
  cfg.tol = 1e-8;
  const rte::FftSolveResult fast = rte::solve_fft(sym, m, f, cfg);
  CHECK(fast.stats.converged);
  REQUIRE(fast.modal.has_value());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    for (int mm = 0; mm < modes.count(); ++mm) {
      num += std::norm(fast.modal->at(i, mm) - ref.at(i, mm));
      den += std::norm(ref.at(i, mm));
    }
  }
  CHECK(std::sqrt(num / den) <= 10.0 * cfg.tol);
  // The isotropic view of the modal solve fills u.
  CHECK(fast.u.size() == static_cast<size_t>(g.size()));
  CHECK(rel_err(fast.u, ref.mode0_real()) <= 1e-6);
}

TEST_CASE("solve_fft throws ConvergenceError when starved of iterations") {
  const rte::Grid g(16);
  const rte::Medium m = rte::Medium::homogeneous(1.0, 1.2);
  const rte::CirculantSymbol sym = rte::CirculantSymbol::build_iso(g, m);
  const std::vector<double> f = rte::make_source(1, g);
  rte::KrylovConfig cfg;
  cfg.tol = 1e-14;
  cfg.max_iters = 1;
  CHECK_THROWS_AS(rte::solve_fft(sym, m, f, cfg), rte::ConvergenceError);
}
