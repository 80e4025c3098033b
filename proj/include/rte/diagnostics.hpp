#pragma once

// Analytic invariants of the integral formulation turned into runtime
// checks: the contraction constant of the scattering operator, discrete row
// sums, positive definiteness of the system matrices, the a priori solution
// bound, and fixed-point convergence against the direct solve.

#include <optional>
#include <string>
#include <vector>

#include "rte/dense.hpp"
#include "rte/medium.hpp"

namespace rte {

// Quadrature of the singular kernel perturbs the continuum row-sum bound;
// the slack absorbs that discretization error.
constexpr double kRowSumSlack = 0.02;
// Largest contraction constant at which the fixed-point iteration can reach
// the direct solution within the iteration budget.
constexpr double kRichardsonFeasibleC = 0.995;

// C = 1 - exp(-sqrt(2) * sup mu_s) on the unit square; always in [0, 1).
double contraction_constant(const Medium& medium);

struct RowSumReport {
  double max_row_sum = 0.0;
  double bound = 0.0;  // C * (1 + slack)
  bool pass = false;
};

// Maximum discrete row sum of the isotropic K matrix against the contraction
// bound. Requires an isotropic dense system.
RowSumReport row_sum_check(const DenseSystem& sys);

// Smallest eigenvalue of the symmetric (isotropic) or Hermitian (anisotropic)
// part of A; positive definiteness of the full matrix follows. Guarded to
// rows <= 4096.
double spd_probe(const DenseSystem& sys);

struct RichardsonReport {
  double max_ratio = 0.0;
  double ratio_bound = 0.0;  // C + slack
  int iterations = 0;
  bool converged = false;
  double rel_error_vs_direct = 0.0;  // meaningful when converged
  bool convergence_checked = false;  // false when C makes it infeasible
  bool pass = false;
};

struct AnalysisReport {
  double sup_mu_s = 0.0;
  double tau_bar = 0.0;  // domain diameter sqrt(2)
  double contraction = 0.0;

  RowSumReport row_sum;

  std::optional<double> min_eig;  // absent when rows exceed the probe cap
  bool spd_pass = false;

  // Margins bound - ||u||_p; nonnegative on pass.
  double apriori_margin_p2 = 0.0;
  double apriori_margin_pinf = 0.0;
  bool apriori_pass = false;

  RichardsonReport richardson;

  bool pass() const;
  std::string to_json() const;  // single line
  static std::string csv_header();
  std::string to_csv() const;
};

// Full battery on an isotropic configuration: assembles the dense system,
// solves for u, and runs every check that applies at this size.
AnalysisReport analyze_iso(const Grid& grid, const Medium& medium,
                           const std::vector<double>& f,
                           const KernelConfig& cfg = {},
                           int richardson_iters = 3000);

}  // namespace rte
