#pragma once

// Matrix-free Krylov solvers: MINRES (Paige-Saunders) for the real symmetric
// isotropic system and restarted GMRES with Givens rotations for the complex
// non-Hermitian anisotropic system. Both record the per-iteration relative
// residual so solver behavior is itself an observable.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

namespace rte {

struct KrylovConfig {
  double tol = 1e-8;     // relative residual target
  int max_iters = 2000;
  int restart = 50;      // GMRES only
};

struct KrylovStats {
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;  // relative, from an explicit residual
  std::vector<double> history;  // per-iteration relative residual estimates
};

// apply(v) -> A*v for symmetric A. x is overwritten with the solution
// starting from x = 0. b = 0 returns x = 0 immediately.
template <class Apply>
KrylovStats minres(const Apply& apply, const Eigen::VectorXd& b,
                   Eigen::VectorXd& x, const KrylovConfig& cfg) {
  using Vec = Eigen::VectorXd;
  KrylovStats stats;
  const double bnorm = b.norm();
  x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    stats.converged = true;
    return stats;
  }

  Vec v = b / bnorm;
  Vec v_old = Vec::Zero(b.size());
  Vec w = Vec::Zero(b.size()), w_old = Vec::Zero(b.size());
  double beta = bnorm;
  double eta = beta;
  double c = 1.0, c_old = 1.0, s = 0.0, s_old = 0.0;

  for (int it = 0; it < cfg.max_iters; ++it) {
    Vec av = apply(v);
    const double alpha = v.dot(av);
    av -= alpha * v + beta * v_old;
    const double beta_new = av.norm();

    // Rotate the new tridiagonal column by the two previous reflections,
    // then form the rotation annihilating beta_new.
    const double rho1_hat = c * alpha - c_old * s * beta;
    const double rho1 = std::hypot(rho1_hat, beta_new);
    const double rho2 = s * alpha + c_old * c * beta;
    const double rho3 = s_old * beta;
    const double c_new = rho1_hat / rho1;
    const double s_new = beta_new / rho1;

    Vec w_new = (v - rho3 * w_old - rho2 * w) / rho1;
    x += (c_new * eta) * w_new;
    eta = -s_new * eta;

    w_old.swap(w);
    w.swap(w_new);
    v_old.swap(v);
    if (beta_new > 0.0) v = av / beta_new;
    c_old = c;
    c = c_new;
    s_old = s;
    s = s_new;
    beta = beta_new;

    const double rel = std::abs(eta) / bnorm;
    stats.history.push_back(rel);
    ++stats.iterations;
    if (rel <= cfg.tol || beta_new == 0.0) break;
  }

  stats.final_residual = (b - apply(x)).norm() / bnorm;
  stats.converged = stats.final_residual <= cfg.tol;
  return stats;
}

// apply(v) -> A*v for general complex A; restarted GMRES. The true residual
// is recomputed at every restart, so a converged flag is trustworthy.
template <class Apply>
KrylovStats gmres(const Apply& apply, const Eigen::VectorXcd& b,
                  Eigen::VectorXcd& x, const KrylovConfig& cfg) {
  using Cplx = std::complex<double>;
  using Vec = Eigen::VectorXcd;
  KrylovStats stats;
  const double bnorm = b.norm();
  x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    stats.converged = true;
    return stats;
  }

  const int restart = std::max(1, cfg.restart);
  Vec r = b;
  double rnorm = bnorm;

  while (stats.iterations < cfg.max_iters) {
    const int m = std::min(restart, cfg.max_iters - stats.iterations);
    std::vector<Vec> V;
    V.reserve(static_cast<size_t>(m) + 1);
    V.push_back(r / rnorm);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<double> gc(static_cast<size_t>(m));
    std::vector<Cplx> gs(static_cast<size_t>(m));
    Vec g = Vec::Zero(m + 1);
    g(0) = rnorm;

    int k = 0;
    bool inner_done = false;
    for (; k < m && !inner_done; ++k) {
      Vec wv = apply(V[static_cast<size_t>(k)]);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V[static_cast<size_t>(i)].dot(wv);
        wv -= H(i, k) * V[static_cast<size_t>(i)];
      }
      H(k + 1, k) = wv.norm();

      for (int i = 0; i < k; ++i) {
        const Cplx t = gc[static_cast<size_t>(i)] * H(i, k) +
                       gs[static_cast<size_t>(i)] * H(i + 1, k);
        H(i + 1, k) = -std::conj(gs[static_cast<size_t>(i)]) * H(i, k) +
                      gc[static_cast<size_t>(i)] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(std::abs(H(k, k)), std::abs(H(k + 1, k)));
      if (denom == 0.0) {
        gc[static_cast<size_t>(k)] = 1.0;
        gs[static_cast<size_t>(k)] = Cplx(0.0, 0.0);
      } else if (std::abs(H(k, k)) == 0.0) {
        gc[static_cast<size_t>(k)] = 0.0;
        gs[static_cast<size_t>(k)] = Cplx(1.0, 0.0);
      } else {
        gc[static_cast<size_t>(k)] = std::abs(H(k, k)) / denom;
        gs[static_cast<size_t>(k)] =
            (H(k, k) / std::abs(H(k, k))) * std::conj(H(k + 1, k)) / denom;
      }
      const Cplx t = gc[static_cast<size_t>(k)] * H(k, k) +
                     gs[static_cast<size_t>(k)] * H(k + 1, k);
      H(k, k) = t;
      H(k + 1, k) = Cplx(0.0, 0.0);
      g(k + 1) = -std::conj(gs[static_cast<size_t>(k)]) * g(k);
      g(k) = gc[static_cast<size_t>(k)] * g(k);

      const double rel = std::abs(g(k + 1)) / bnorm;
      stats.history.push_back(rel);
      ++stats.iterations;
      if (rel <= cfg.tol) inner_done = true;

      // wv still holds the unrotated next basis direction; a vanishing norm
      // is a lucky breakdown (exact solution inside the current space).
      const double wnorm = wv.norm();
      if (wnorm == 0.0) {
        inner_done = true;
      } else {
        V.push_back(wv / wnorm);
      }
    }

    // Back-substitute the k-by-k triangle and update x.
    Eigen::VectorXcd y(k);
    for (int i = k - 1; i >= 0; --i) {
      Cplx acc = g(i);
      for (int j = i + 1; j < k; ++j) acc -= H(i, j) * y(j);
      y(i) = acc / H(i, i);
    }
    for (int i = 0; i < k; ++i) x += y(i) * V[static_cast<size_t>(i)];

    r = b - apply(x);
    rnorm = r.norm();
    if (rnorm / bnorm <= cfg.tol) break;
  }

  stats.final_residual = rnorm / bnorm;
  stats.converged = stats.final_residual <= cfg.tol;
  return stats;
}

}  // namespace rte
