#include "rte/dense.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace rte {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double weighted_norm(const Eigen::VectorXd& v, double cell_volume, int p) {
  if (p == 1) return v.cwiseAbs().sum() * cell_volume;
  if (p == 2) return std::sqrt(v.squaredNorm() * cell_volume);
  return v.cwiseAbs().maxCoeff();
}

}  // namespace

int DenseSystem::rows() const {
  return form_ == SystemForm::Aniso ? grid_.size() * modes_.count()
                                    : grid_.size();
}

DenseSystem DenseSystem::assemble_iso(const Grid& grid, const Medium& medium,
                                      const KernelConfig& cfg, int max_rows) {
  const int N = grid.size();
  if (N > max_rows) {
    throw InputError("assemble_iso: " + std::to_string(N) +
                     " rows exceed the dense cap " + std::to_string(max_rows) +
                     "; use a fast backend");
  }
  medium.validate(grid);
  DenseSystem sys(grid, ModeSet::from_list({0}));
  sys.medium_ = &medium;
  sys.cfg_ = cfg;

  KernelEvaluator ker(medium, cfg);
  const double h = grid.h(), h2 = grid.cell_volume();

  sys.ktilde_.resize(N, N);
  sys.kdiag_.resize(N);
  sys.mu_s_.resize(N);
  for (int i = 0; i < N; ++i) {
    const Vec2& xi = grid.center(i);
    sys.mu_s_(i) = medium.mu_s(xi);
    sys.ktilde_(i, i) = ker.diag_ktilde(xi, h);
    sys.kdiag_(i) = ker.diag_kiso(xi, h);
    // Mirror the strict upper triangle: Ktilde is symmetric by construction,
    // which the symmetric solve and MINRES comparisons rely on.
    for (int j = i + 1; j < N; ++j) {
      const double v = ker.ktilde(xi, grid.center(j)) * h2;
      sys.ktilde_(i, j) = v;
      sys.ktilde_(j, i) = v;
    }
  }

  if (sys.mu_s_.minCoeff() >= kMuSFloor) {
    sys.form_ = SystemForm::IsoSymmetric;
  } else {
    std::cerr << "assemble_iso: mu_s falls below " << kMuSFloor
              << "; using the unsymmetrized form\n";
    sys.form_ = SystemForm::IsoPlain;
  }
  return sys;
}

Eigen::MatrixXd DenseSystem::kmatrix() const {
  Eigen::MatrixXd K = ktilde_ * mu_s_.asDiagonal();
  K.diagonal() = kdiag_;
  return K;
}

Eigen::MatrixXd DenseSystem::a_iso() const {
  if (form_ == SystemForm::IsoSymmetric) {
    Eigen::MatrixXd A = -ktilde_;
    A.diagonal() += mu_s_.cwiseInverse();
    return A;
  }
  Eigen::MatrixXd A = -kmatrix();
  A.diagonal().array() += 1.0;
  return A;
}

DenseSystem DenseSystem::assemble_aniso(const Grid& grid, const Medium& medium,
                                        const PhaseFunction& phase,
                                        const ModeSet& modes,
                                        const KernelConfig& cfg,
                                        int max_rows) {
  const int N = grid.size(), M = modes.count();
  if (static_cast<long>(N) * M > max_rows) {
    throw InputError("assemble_aniso: " + std::to_string(N * M) +
                     " rows exceed the dense cap " + std::to_string(max_rows) +
                     "; use a fast backend");
  }
  medium.validate(grid);
  DenseSystem sys(grid, modes);
  sys.medium_ = &medium;
  sys.cfg_ = cfg;
  sys.form_ = SystemForm::Aniso;

  KernelEvaluator ker(medium, cfg);
  SigmaHatFn sig = phase.sigma_hat_fn();
  const double h = grid.h(), h2 = grid.cell_volume();

  sys.mu_s_.resize(N);
  for (int i = 0; i < N; ++i) sys.mu_s_(i) = medium.mu_s(grid.center(i));

  // sigma_hat at every (cell, mode) once; the kernel entry for (i,k),(j,k')
  // is ktilde_ij * mu_s(x_j) * sig[j][k'] * e^{i(k'-k)theta_ij}.
  std::vector<Complex> sigc(static_cast<size_t>(N) * M);
  for (int j = 0; j < N; ++j) {
    for (int m = 0; m < M; ++m) {
      sigc[static_cast<size_t>(j) * M + m] = sig(grid.center(j), modes.mode(m));
    }
  }

  const int kmin = modes.mode(0), kmax = modes.mode(M - 1);
  const int dspan = kmax - kmin;
  std::vector<Complex> phases(static_cast<size_t>(2 * dspan) + 1);

  sys.kaniso_.resize(N * M, N * M);
  for (int j = 0; j < N; ++j) {
    const Vec2& xj = grid.center(j);
    for (int i = 0; i < N; ++i) {
      if (i == j) continue;
      const Vec2& xi = grid.center(i);
      const double kt = ker.ktilde(xi, xj) * h2 * sys.mu_s_(j);
      // Powers e^{i d theta} for d = -dspan..dspan by recurrence.
      const double th = angle_between(xi, xj);
      const Complex e1 = std::polar(1.0, th);
      phases[static_cast<size_t>(dspan)] = Complex(1.0, 0.0);
      for (int d = 1; d <= dspan; ++d) {
        phases[static_cast<size_t>(dspan + d)] =
            phases[static_cast<size_t>(dspan + d - 1)] * e1;
        phases[static_cast<size_t>(dspan - d)] =
            std::conj(phases[static_cast<size_t>(dspan + d)]);
      }
      for (int m = 0; m < M; ++m) {
        for (int mp = 0; mp < M; ++mp) {
          const int d = modes.mode(mp) - modes.mode(m);
          sys.kaniso_(sys.row_of(i, m), sys.row_of(j, mp)) =
              kt * sigc[static_cast<size_t>(j) * M + mp] *
              phases[static_cast<size_t>(dspan + d)];
        }
      }
    }
    for (int m = 0; m < M; ++m) {
      for (int mp = 0; mp < M; ++mp) {
        sys.kaniso_(sys.row_of(j, m), sys.row_of(j, mp)) =
            ker.diag_kaniso(xj, h, modes.mode(m), modes.mode(mp), sig);
      }
    }
  }
  return sys;
}

Eigen::MatrixXcd DenseSystem::a_aniso() const {
  Eigen::MatrixXcd A = -kaniso_;
  A.diagonal().array() += Complex(1.0, 0.0);
  return A;
}

Eigen::VectorXcd DenseSystem::rhs_aniso(const std::vector<double>& f) const {
  const int N = grid_.size(), M = modes_.count();
  if (mu_s_.minCoeff() >= kMuSFloor) {
    // K * g_hat with g_hat supported on the k = 0 block.
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(N * M);
    const int m0 = modes_.index_of(0);
    for (int j = 0; j < N; ++j) {
      g(row_of(j, m0)) = Complex(f[static_cast<size_t>(j)] / mu_s_(j), 0.0);
    }
    return kaniso_ * g;
  }
  // mu_s has zeros: build (Ktilde-phase) * g0 with g0_{j,k} = f_j delta_{k,0}
  // directly from kernel evaluations (no division by mu_s).
  KernelEvaluator ker(*medium_, cfg_);
  const double h = grid_.h(), h2 = grid_.cell_volume();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N * M);
  for (int m = 0; m < M; ++m) {
    const int k = modes_.mode(m);
    for (int i = 0; i < N; ++i) {
      Complex acc{0.0, 0.0};
      for (int j = 0; j < N; ++j) {
        const double fj = f[static_cast<size_t>(j)];
        if (fj == 0.0) continue;
        acc += (i == j ? ker.diag_ktilde_aniso(grid_.center(i), h, k, 0)
                       : ker.ktilde_aniso(grid_.center(i), k, grid_.center(j), 0) * h2) *
               fj;
      }
      rhs(row_of(i, m)) = acc;
    }
  }
  return rhs;
}

DenseSolveResult DenseSystem::solve(const std::vector<double>& f) const {
  if (static_cast<int>(f.size()) != grid_.size()) {
    throw InputError("solve: source vector length mismatch");
  }
  if (form_ == SystemForm::Aniso) {
    throw InputError("solve: anisotropic system requires solve_modal");
  }
  const int N = grid_.size();
  DenseSolveResult out;
  out.u.assign(static_cast<size_t>(N), 0.0);

  const Eigen::VectorXd rhs = ktilde_ * as_vec(f);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    out.u_tilde.assign(static_cast<size_t>(N), 0.0);
    return out;
  }

  const Eigen::MatrixXd A = a_iso();
  Eigen::VectorXd x;
  if (form_ == SystemForm::IsoSymmetric) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
      throw FactorizationError("solve_dense: LDLT factorization failed");
    }
    x = ldlt.solve(rhs);
    if ((A * x - rhs).norm() > 1e-13 * bnorm) x += ldlt.solve(rhs - A * x);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    x = lu.solve(rhs);
    if ((A * x - rhs).norm() > 1e-13 * bnorm) x += lu.solve(rhs - A * x);
  }
  out.residual = (A * x - rhs).norm() / bnorm;
  if (!std::isfinite(out.residual) || out.residual > 1e-12) {
    throw FactorizationError("solve_dense: residual " +
                             std::to_string(out.residual) +
                             " exceeds 1e-12 (singular system?)");
  }

  if (form_ == SystemForm::IsoSymmetric) {
    out.u_tilde.assign(x.data(), x.data() + N);
    for (int i = 0; i < N; ++i) out.u[static_cast<size_t>(i)] = x(i) / mu_s_(i);
  } else {
    for (int i = 0; i < N; ++i) out.u[static_cast<size_t>(i)] = x(i);
  }
  return out;
}

ModalSolution DenseSystem::solve_modal(const std::vector<double>& f,
                                       double* residual) const {
  if (form_ != SystemForm::Aniso) {
    throw InputError("solve_modal: assembled system is isotropic");
  }
  if (static_cast<int>(f.size()) != grid_.size()) {
    throw InputError("solve_modal: source vector length mismatch");
  }
  ModalSolution modal(grid_, modes_);
  const Eigen::VectorXcd rhs = rhs_aniso(f);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (residual) *residual = 0.0;
    return modal;
  }
  const Eigen::MatrixXcd A = a_aniso();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  Eigen::VectorXcd x = lu.solve(rhs);
  if ((A * x - rhs).norm() > 1e-13 * bnorm) x += lu.solve(rhs - A * x);
  const double res = (A * x - rhs).norm() / bnorm;
  if (!std::isfinite(res) || res > 1e-12) {
    throw FactorizationError("solve_modal: residual " + std::to_string(res) +
                             " exceeds 1e-12 (singular system?)");
  }
  if (residual) *residual = res;
  std::copy(x.data(), x.data() + x.size(), modal.data().begin());
  return modal;
}

void DenseSystem::dump_triplets(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("dump_triplets: cannot open " + path);
  out.precision(17);
  if (form_ == SystemForm::Aniso) {
    for (int i = 0; i < kaniso_.rows(); ++i) {
      for (int j = 0; j < kaniso_.cols(); ++j) {
        const Complex v = kaniso_(i, j);
        out << i << ' ' << j << ' ' << v.real() << ' ' << v.imag() << '\n';
      }
    }
  } else {
    for (int i = 0; i < ktilde_.rows(); ++i) {
      for (int j = 0; j < ktilde_.cols(); ++j) {
        out << i << ' ' << j << ' ' << ktilde_(i, j) << '\n';
      }
    }
  }
}

AprioriReport apriori_check(const std::vector<double>& u,
                            const std::vector<double>& f, const Medium& medium,
                            const Grid& grid, int p) {
  AprioriReport r;
  r.norm_u = weighted_norm(as_vec(u), grid.cell_volume(), p);
  r.norm_f = weighted_norm(as_vec(f), grid.cell_volume(), p);
  r.bound = domain::kDiameter *
            std::exp(domain::kDiameter * medium.sup_mu_s()) * r.norm_f;
  r.margin = r.bound - r.norm_u;
  r.pass = r.norm_u <= r.bound;
  return r;
}

AprioriReport apriori_check_modal(const ModalSolution& modal,
                                  const std::vector<double>& f,
                                  const Medium& medium, int p) {
  const Grid& grid = modal.grid();
  Eigen::VectorXd pointwise(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (int m = 0; m < modal.modes().count(); ++m) {
      s += std::norm(modal.at(i, m));
    }
    pointwise(i) = std::sqrt(s);
  }
  AprioriReport r;
  r.norm_u = weighted_norm(pointwise, grid.cell_volume(), p);
  r.norm_f = weighted_norm(as_vec(f), grid.cell_volume(), p);
  r.bound = domain::kDiameter *
            std::exp(domain::kDiameter * medium.sup_mu_s()) * r.norm_f;
  r.margin = r.bound - r.norm_u;
  r.pass = r.norm_u <= r.bound;
  return r;
}

RichardsonResult richardson_solve(const DenseSystem& sys,
                                  const std::vector<double>& f, double tol,
                                  int max_iters) {
  const int N = sys.grid().size();
  // Iterate the operator whose fixed point is sys.solve()'s answer: the
  // symmetric form eliminates to I - Ktilde diag(mu_s), which differs from
  // kmatrix() in the diagonal cells on a variable medium.
  const Eigen::MatrixXd K =
      sys.form() == SystemForm::IsoSymmetric
          ? Eigen::MatrixXd(sys.ktilde() * sys.mu_s_cells().asDiagonal())
          : sys.kmatrix();
  const Eigen::VectorXd b = sys.ktilde() * as_vec(f);

  RichardsonResult r;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
  double prev_update = -1.0;
  for (int m = 0; m < max_iters; ++m) {
    Eigen::VectorXd next = K * u + b;
    // Sup norm: the successive-update ratio is then bounded by the maximum
    // discrete row sum, the quantity the contraction lemma controls.
    const double upd = (next - u).lpNorm<Eigen::Infinity>();
    u = next;
    ++r.iterations;
    if (prev_update > 0.0 && m >= 3) {
      r.max_ratio = std::max(r.max_ratio, upd / prev_update);
    }
    prev_update = upd;
    if (upd <= tol * std::max(u.lpNorm<Eigen::Infinity>(), 1e-300)) {
      r.converged = true;
      break;
    }
  }
  r.u.assign(u.data(), u.data() + N);
  return r;
}

}  // namespace rte
