#pragma once

// Fast solver for translation-invariant kernels: the Nystrom matrix is a
// block of a (2n)x(2n) circulant matrix, so matvecs are FFT convolutions and
// the system is solved with MINRES (isotropic symmetric form) or GMRES
// (anisotropic). Kernel samples at displacement 0 are the diagonal cell
// integrals, which makes the fast apply agree with the dense matrix
// entrywise, not just asymptotically.

#include <memory>
#include <optional>
#include <vector>

#include "rte/angular.hpp"
#include "rte/kernel.hpp"
#include "rte/krylov.hpp"

namespace rte {

namespace detail {
class Fft2D;
class RealConv;
}

enum class SymbolVariant { KtildeIso, KIso, Aniso };

class CirculantSymbol {
 public:
  // Isotropic symbol; KtildeIso requires constant mu_t (mu_s may vary, it
  // only enters the solve diagonally), KIso requires constant mu_s and mu_t.
  static CirculantSymbol build_iso(const Grid& grid, const Medium& medium,
                                   const KernelConfig& cfg = {},
                                   bool plain_k = false);
  // Anisotropic mode-pair symbols; requires a fully homogeneous medium and
  // position-independent sigma_hat.
  static CirculantSymbol build_aniso(const Grid& grid, const Medium& medium,
                                     const PhaseFunction& phase,
                                     const ModeSet& modes,
                                     const KernelConfig& cfg = {});

  CirculantSymbol(CirculantSymbol&&) noexcept;
  CirculantSymbol& operator=(CirculantSymbol&&) noexcept;
  ~CirculantSymbol();

  SymbolVariant variant() const { return variant_; }
  int n() const { return n_; }
  const ModeSet& modes() const { return modes_; }

  // Kernel-matrix application by padded FFT convolution. The isotropic
  // overload takes and returns length-N real vectors; the anisotropic one
  // mode-blocked length-N*M complex vectors.
  std::vector<double> apply(const std::vector<double>& phi) const;
  std::vector<Complex> apply(const std::vector<Complex>& phi) const;

 private:
  explicit CirculantSymbol(int n);

  SymbolVariant variant_ = SymbolVariant::KtildeIso;
  int n_ = 0;
  ModeSet modes_;
  // Frequency-domain symbols. Isotropic variants store one half spectrum of
  // size 2n*(n+1) (real-data transform); Aniso stores one (2n)^2 array per
  // mode pair, row-major over (k, k').
  std::vector<std::vector<Complex>> sym_;
  std::unique_ptr<detail::Fft2D> fft_;        // Aniso engine
  std::unique_ptr<detail::RealConv> conv_;    // isotropic engine
};

struct FftSolveResult {
  std::vector<double> u;                  // isotropic mean density
  std::vector<double> u_tilde;            // mu_s * u (symmetric form)
  std::optional<ModalSolution> modal;     // anisotropic solve
  KrylovStats stats;
};

// Solves the configuration the symbol was built for. Isotropic: MINRES on
// (diag(1/mu_s) - Ktilde) u_tilde = Ktilde f. Anisotropic: GMRES on
// (I - K) Phi_hat = K g_hat. Throws ConvergenceError (with the residual
// history) when max_iters is exhausted.
FftSolveResult solve_fft(const CirculantSymbol& symbol, const Medium& medium,
                         const std::vector<double>& f,
                         const KrylovConfig& cfg);

}  // namespace rte
