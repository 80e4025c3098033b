#pragma once

// Dense Nystrom assembly and direct solve. This is the correctness oracle
// the fast backends are tested against; it refuses to scale past a row cap.
//
// Isotropic symmetric form (requires mu_s >= floor):
//   (diag(1/mu_s) - Ktilde) u_tilde = Ktilde f,   u = u_tilde / mu_s
// Isotropic fallback (mu_s may vanish):  (I - K) u = Ktilde f
// Anisotropic:  (I - K) Phi_hat = K g_hat,  g_hat_{j,k} = f_j delta_{k,0}/mu_s_j

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rte/angular.hpp"
#include "rte/kernel.hpp"

namespace rte {

enum class SystemForm { IsoSymmetric, IsoPlain, Aniso };

struct DenseSolveResult {
  std::vector<double> u;        // isotropic mean density (iso forms)
  std::vector<double> u_tilde;  // mu_s * u (symmetric form only)
  double residual = 0.0;        // relative residual of the linear solve
};

class DenseSystem {
 public:
  static constexpr int kDefaultMaxRows = 20000;
  static constexpr double kMuSFloor = 1e-12;

  static DenseSystem assemble_iso(const Grid& grid, const Medium& medium,
                                  const KernelConfig& cfg = {},
                                  int max_rows = kDefaultMaxRows);
  static DenseSystem assemble_aniso(const Grid& grid, const Medium& medium,
                                    const PhaseFunction& phase,
                                    const ModeSet& modes,
                                    const KernelConfig& cfg = {},
                                    int max_rows = kDefaultMaxRows);

  SystemForm form() const { return form_; }
  const Grid& grid() const { return grid_; }
  const Medium& medium() const { return *medium_; }
  const ModeSet& modes() const { return modes_; }
  int rows() const;

  // Row of (cell i, mode index m): m*N + i (mode-blocked, matching
  // ModalSolution's layout).
  int row_of(int cell, int mode_idx) const { return mode_idx * grid_.size() + cell; }

  // Isotropic pieces. ktilde() is exactly symmetric by construction.
  const Eigen::MatrixXd& ktilde() const { return ktilde_; }
  const Eigen::VectorXd& mu_s_cells() const { return mu_s_; }
  // K = mu_s(y_j)-scaled Ktilde with its own diagonal cell integrals.
  Eigen::MatrixXd kmatrix() const;
  Eigen::MatrixXd a_iso() const;

  // Anisotropic pieces.
  const Eigen::MatrixXcd& kmatrix_aniso() const { return kaniso_; }
  Eigen::MatrixXcd a_aniso() const;

  DenseSolveResult solve(const std::vector<double>& f) const;
  ModalSolution solve_modal(const std::vector<double>& f,
                            double* residual = nullptr) const;

  // Plain-text triplet dump (row col value [imag]) for debugging.
  void dump_triplets(const std::string& path) const;

 private:
  DenseSystem(Grid grid, ModeSet modes) : grid_(std::move(grid)), modes_(std::move(modes)) {}

  Eigen::VectorXcd rhs_aniso(const std::vector<double>& f) const;

  SystemForm form_ = SystemForm::IsoSymmetric;
  Grid grid_;
  ModeSet modes_;
  const Medium* medium_ = nullptr;
  KernelConfig cfg_;

  Eigen::MatrixXd ktilde_;   // iso forms
  Eigen::VectorXd kdiag_;    // diagonal cell integrals of the K variant
  Eigen::VectorXd mu_s_;
  Eigen::MatrixXcd kaniso_;  // aniso form
};

struct AprioriReport {
  double norm_u = 0.0;
  double norm_f = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - norm_u
  bool pass = false;
};

// ||u||_p <= sqrt(2) * exp(sqrt(2)*||mu_s||_inf) * ||f||_p with cell-volume
// weighted discrete norms (p in {1,2,inf}; inf encoded as p <= 0).
AprioriReport apriori_check(const std::vector<double>& u,
                            const std::vector<double>& f, const Medium& medium,
                            const Grid& grid, int p);
// Modal variant: pointwise l2 over modes first, then the spatial p-norm.
AprioriReport apriori_check_modal(const ModalSolution& modal,
                                  const std::vector<double>& f,
                                  const Medium& medium, int p);

struct RichardsonResult {
  std::vector<double> u;
  int iterations = 0;
  double max_ratio = 0.0;  // max successive update ratio after warmup
  bool converged = false;
};

// u <- K u + Ktilde f from u = 0 until the update drops below tol*||u||.
// The observed ratio bounds the discrete contraction constant.
RichardsonResult richardson_solve(const DenseSystem& sys,
                                  const std::vector<double>& f,
                                  double tol = 1e-12, int max_iters = 10000);

}  // namespace rte
