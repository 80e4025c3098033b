#include "rte/fft_solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "rte/dense.hpp"

namespace rte {

namespace detail {

// In-place complex 2-D DFTs of fixed size L x L. Plans are created once with
// FFTW_ESTIMATE (deterministic, no measurement runs); execution uses the
// new-array interface on fftw_malloc'ed buffers, so apply stays pure.
class Fft2D {
 public:
  explicit Fft2D(int L) : L_(L) {
    buf_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(L) * L));
    fwd_ = fftw_plan_dft_2d(L, L, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(L, L, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int size() const { return L_; }

  void forward(Complex* data) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
  void backward(Complex* data) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  int L_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

// r2c/c2r pair of fixed size L x L with persistent fftw buffers. The
// isotropic convolution is real-to-real, so the L x (L/2 + 1) half spectrum
// suffices; that halves the memory traffic of the c2c pair, which is what
// keeps the apply cost near-linear across cache sizes. Plans use
// FFTW_ESTIMATE (deterministic); reusing the buffers keeps apply free of
// per-call allocation.
class RealConv {
 public:
  explicit RealConv(int L) : L_(L), H_(L / 2 + 1) {
    real_ = static_cast<double*>(
        fftw_malloc(sizeof(double) * static_cast<size_t>(L) * L));
    spec_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(L) * H_));
    std::fill(real_, real_ + static_cast<size_t>(L) * L, 0.0);
    fwd_ = fftw_plan_dft_r2c_2d(L, L, real_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(L, L, spec_, real_, FFTW_ESTIMATE);
  }
  ~RealConv() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealConv(const RealConv&) = delete;
  RealConv& operator=(const RealConv&) = delete;

  size_t spec_size() const { return static_cast<size_t>(L_) * H_; }
  double* real() { return real_; }
  Complex* spec() { return reinterpret_cast<Complex*>(spec_); }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

 private:
  int L_, H_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_, bwd_;
};

// RAII fftw_malloc'ed array of Complex (alignment matches the plans).
class FftwArray {
 public:
  explicit FftwArray(size_t n) : n_(n) {
    p_ = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * n));
    std::fill(p_, p_ + n, Complex{});
  }
  ~FftwArray() { fftw_free(p_); }
  FftwArray(const FftwArray&) = delete;
  FftwArray& operator=(const FftwArray&) = delete;
  Complex* data() { return p_; }
  Complex& operator[](size_t i) { return p_[i]; }

 private:
  size_t n_;
  Complex* p_;
};

}  // namespace detail

namespace {

bool nearly_constant_on_probe(const std::function<double(const Vec2&)>& field) {
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < 33; ++j) {
    for (int i = 0; i < 33; ++i) {
      const double v = field(Vec2(i / 32.0, j / 32.0));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi - lo <= 1e-13 * std::max(1.0, std::abs(hi));
}

bool constant_mu_t(const Medium& m) {
  return m.is_homogeneous() ||
         nearly_constant_on_probe([&m](const Vec2& p) { return m.mu_t(p); });
}

bool constant_mu_s(const Medium& m) {
  return m.is_homogeneous() ||
         nearly_constant_on_probe([&m](const Vec2& p) { return m.mu_s(p); });
}

// Wrap-index for displacement d on the length-L circulant axis.
inline int wrap(int d, int L) { return d >= 0 ? d : d + L; }

}  // namespace

CirculantSymbol::CirculantSymbol(int n) : n_(n), modes_(ModeSet::from_list({0})) {}

CirculantSymbol::CirculantSymbol(CirculantSymbol&&) noexcept = default;
CirculantSymbol& CirculantSymbol::operator=(CirculantSymbol&&) noexcept = default;
CirculantSymbol::~CirculantSymbol() = default;

CirculantSymbol CirculantSymbol::build_iso(const Grid& grid,
                                           const Medium& medium,
                                           const KernelConfig& cfg,
                                           bool plain_k) {
  if (!constant_mu_t(medium)) {
    throw InputError(
        "build_symbol: kernel is not translation-invariant (mu_t varies); "
        "use the dense or skeletonization backend");
  }
  if (plain_k && !constant_mu_s(medium)) {
    throw InputError("build_symbol: plain-K variant requires constant mu_s");
  }
  const int n = grid.n(), L = 2 * n;
  const double h = grid.h(), h2 = grid.cell_volume();
  CirculantSymbol s(n);
  s.variant_ = plain_k ? SymbolVariant::KIso : SymbolVariant::KtildeIso;
  s.conv_ = std::make_unique<detail::RealConv>(L);

  KernelEvaluator ker(medium, cfg);
  const Vec2 x0 = grid.center(0);
  const double mus = plain_k ? medium.mu_s(x0) : 1.0;
  const double diag = plain_k ? ker.diag_kiso(x0, h) : ker.diag_ktilde(x0, h);

  double* samp = s.conv_->real();
  std::fill(samp, samp + static_cast<size_t>(L) * L, 0.0);
  for (int d2 = -(n - 1); d2 <= n - 1; ++d2) {
    for (int d1 = -(n - 1); d1 <= n - 1; ++d1) {
      const size_t idx =
          static_cast<size_t>(wrap(d2, L)) * L + static_cast<size_t>(wrap(d1, L));
      if (d1 == 0 && d2 == 0) {
        samp[idx] = diag;
      } else {
        const Vec2 y{x0.x - d1 * h, x0.y - d2 * h};
        samp[idx] = mus * ker.ktilde(x0, y) * h2;
      }
    }
  }
  s.conv_->forward();
  s.sym_.emplace_back(s.conv_->spec(), s.conv_->spec() + s.conv_->spec_size());
  return s;
}

CirculantSymbol CirculantSymbol::build_aniso(const Grid& grid,
                                             const Medium& medium,
                                             const PhaseFunction& phase,
                                             const ModeSet& modes,
                                             const KernelConfig& cfg) {
  if (!(constant_mu_t(medium) && constant_mu_s(medium))) {
    throw InputError(
        "build_symbol: anisotropic circulant symbols require a homogeneous "
        "medium; use the dense or skeletonization backend");
  }
  if (!phase.x_independent()) {
    throw InputError(
        "build_symbol: anisotropic circulant symbols require a "
        "position-independent phase function");
  }
  const int n = grid.n(), L = 2 * n, M = modes.count();
  const double h = grid.h(), h2 = grid.cell_volume();
  CirculantSymbol s(n);
  s.variant_ = SymbolVariant::Aniso;
  s.modes_ = modes;
  s.fft_ = std::make_unique<detail::Fft2D>(L);

  KernelEvaluator ker(medium, cfg);
  SigmaHatFn sig = phase.sigma_hat_fn();
  const Vec2 x0 = grid.center(0);
  const double mus = medium.mu_s(x0);

  for (int m = 0; m < M; ++m) {
    for (int mp = 0; mp < M; ++mp) {
      const int k = modes.mode(m), kp = modes.mode(mp);
      const Complex shat = sig(x0, kp);
      detail::FftwArray samp(static_cast<size_t>(L) * L);
      for (int d2 = -(n - 1); d2 <= n - 1; ++d2) {
        for (int d1 = -(n - 1); d1 <= n - 1; ++d1) {
          const size_t idx = static_cast<size_t>(wrap(d2, L)) * L +
                             static_cast<size_t>(wrap(d1, L));
          if (d1 == 0 && d2 == 0) {
            samp[idx] = ker.diag_kaniso(x0, h, k, kp, sig);
          } else {
            // Displacement w = x_i - x_j = (d1*h, d2*h); theta = angle(w).
            const Vec2 y{x0.x - d1 * h, x0.y - d2 * h};
            const double kt = mus * ker.ktilde(x0, y) * h2;
            const Complex ph =
                k == kp ? Complex(1.0, 0.0)
                        : std::polar(1.0, (kp - k) * std::atan2(
                                              static_cast<double>(d2),
                                              static_cast<double>(d1)));
            samp[idx] = kt * shat * ph;
          }
        }
      }
      s.fft_->forward(samp.data());
      s.sym_.emplace_back(samp.data(),
                          samp.data() + static_cast<size_t>(L) * L);
    }
  }
  return s;
}

std::vector<double> CirculantSymbol::apply(const std::vector<double>& phi) const {
  if (variant_ == SymbolVariant::Aniso) {
    throw InputError("apply: anisotropic symbol needs a complex mode-blocked vector");
  }
  const int n = n_, L = 2 * n;
  if (static_cast<int>(phi.size()) != n * n) {
    throw InputError("apply: expected length " + std::to_string(n * n));
  }
  double* buf = conv_->real();
  for (int j = 0; j < n; ++j) {
    double* row = buf + static_cast<size_t>(j) * L;
    const double* src = phi.data() + static_cast<size_t>(j) * n;
    std::copy(src, src + n, row);
    std::fill(row + n, row + L, 0.0);
  }
  std::fill(buf + static_cast<size_t>(n) * L,
            buf + static_cast<size_t>(L) * L, 0.0);
  conv_->forward();
  const auto& sy = sym_[0];
  Complex* spec = conv_->spec();
  const double scale = 1.0 / (static_cast<double>(L) * L);
  for (size_t t = 0; t < sy.size(); ++t) spec[t] *= sy[t] * scale;
  conv_->backward();

  std::vector<double> out(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out[static_cast<size_t>(j) * n + i] = buf[static_cast<size_t>(j) * L + i];
    }
  }
  return out;
}

std::vector<Complex> CirculantSymbol::apply(const std::vector<Complex>& phi) const {
  if (variant_ != SymbolVariant::Aniso) {
    throw InputError("apply: isotropic symbol takes a real vector");
  }
  const int n = n_, L = 2 * n, M = modes_.count(), N = n * n;
  if (static_cast<int>(phi.size()) != N * M) {
    throw InputError("apply: expected length " + std::to_string(N * M));
  }
  const size_t LL = static_cast<size_t>(L) * L;
  const double scale = 1.0 / static_cast<double>(LL);

  // Forward-transform each input mode block once.
  std::vector<std::unique_ptr<detail::FftwArray>> in_hat;
  in_hat.reserve(static_cast<size_t>(M));
  for (int mp = 0; mp < M; ++mp) {
    auto a = std::make_unique<detail::FftwArray>(LL);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        (*a)[static_cast<size_t>(j) * L + i] =
            phi[static_cast<size_t>(mp) * N + static_cast<size_t>(j) * n + i];
      }
    }
    fft_->forward(a->data());
    in_hat.push_back(std::move(a));
  }

  std::vector<Complex> out(static_cast<size_t>(N) * M);
  detail::FftwArray acc(LL);
  for (int m = 0; m < M; ++m) {
    std::fill(acc.data(), acc.data() + LL, Complex{});
    for (int mp = 0; mp < M; ++mp) {
      const auto& sy = sym_[static_cast<size_t>(m) * M + mp];
      const Complex* ih = in_hat[static_cast<size_t>(mp)]->data();
      for (size_t t = 0; t < LL; ++t) acc[t] += sy[t] * ih[t];
    }
    for (size_t t = 0; t < LL; ++t) acc[t] *= scale;
    fft_->backward(acc.data());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        out[static_cast<size_t>(m) * N + static_cast<size_t>(j) * n + i] =
            acc[static_cast<size_t>(j) * L + i];
      }
    }
  }
  return out;
}

FftSolveResult solve_fft(const CirculantSymbol& symbol, const Medium& medium,
                         const std::vector<double>& f,
                         const KrylovConfig& cfg) {
  const int n = symbol.n(), N = n * n;
  if (static_cast<int>(f.size()) != N) {
    throw InputError("solve_fft: source vector length mismatch");
  }
  if (cfg.tol <= 0.0) throw InputError("solve_fft: tolerance must be > 0");
  Grid grid(n);
  FftSolveResult out;

  if (symbol.variant() != SymbolVariant::Aniso) {
    Eigen::VectorXd mus(N);
    for (int i = 0; i < N; ++i) mus(i) = medium.mu_s(grid.center(i));

    if (mus.maxCoeff() < DenseSystem::kMuSFloor) {
      // K = 0: u = Ktilde f, no iteration.
      out.u = symbol.apply(f);
      out.stats.converged = true;
      return out;
    }
    if (mus.minCoeff() < DenseSystem::kMuSFloor) {
      throw InputError(
          "solve_fft: mu_s vanishes somewhere but not everywhere; the "
          "symmetric form is unavailable (use the dense backend)");
    }

    auto conv = [&symbol, N](const Eigen::VectorXd& v) {
      std::vector<double> tmp(v.data(), v.data() + N);
      std::vector<double> r = symbol.apply(tmp);
      return Eigen::Map<Eigen::VectorXd>(r.data(), N).eval();
    };
    auto applyA = [&conv, &mus](const Eigen::VectorXd& v) {
      return (v.cwiseQuotient(mus) - conv(v)).eval();
    };

    const Eigen::VectorXd b = conv(Eigen::Map<const Eigen::VectorXd>(f.data(), N));
    Eigen::VectorXd x;
    out.stats = minres(applyA, b, x, cfg);
    if (!out.stats.converged) {
      throw ConvergenceError(
          "solve_fft: MINRES did not reach tol " + std::to_string(cfg.tol) +
          " in " + std::to_string(out.stats.iterations) + " iterations",
          out.stats.history);
    }
    out.u_tilde.assign(x.data(), x.data() + N);
    out.u.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) out.u[static_cast<size_t>(i)] = x(i) / mus(i);
    return out;
  }

  // Anisotropic: (I - K) Phi = K g_hat, g_hat k=0 block f/mu_s.
  const double mus = medium.mu_s(grid.center(0));
  if (mus < DenseSystem::kMuSFloor) {
    throw InputError("solve_fft: anisotropic path requires mu_s > 0");
  }
  const ModeSet& modes = symbol.modes();
  const int M = modes.count(), m0 = modes.index_of(0);

  std::vector<Complex> g(static_cast<size_t>(N) * M, Complex(0.0, 0.0));
  for (int i = 0; i < N; ++i) {
    g[static_cast<size_t>(m0) * N + i] = Complex(f[static_cast<size_t>(i)] / mus, 0.0);
  }
  std::vector<Complex> kg = symbol.apply(g);
  Eigen::Map<Eigen::VectorXcd> b(kg.data(), static_cast<Eigen::Index>(kg.size()));

  auto applyA = [&symbol](const Eigen::VectorXcd& v) {
    std::vector<Complex> tmp(v.data(), v.data() + v.size());
    std::vector<Complex> kv = symbol.apply(tmp);
    Eigen::VectorXcd r = v;
    for (Eigen::Index t = 0; t < r.size(); ++t) r(t) -= kv[static_cast<size_t>(t)];
    return r;
  };

  Eigen::VectorXcd x;
  out.stats = gmres(applyA, b.eval(), x, cfg);
  if (!out.stats.converged) {
    throw ConvergenceError(
        "solve_fft: GMRES did not reach tol " + std::to_string(cfg.tol) +
        " in " + std::to_string(out.stats.iterations) + " iterations",
        out.stats.history);
  }
  ModalSolution modal(grid, modes);
  std::copy(x.data(), x.data() + x.size(), modal.data().begin());
  out.u = modal.mode0_real();
  out.modal = std::move(modal);
  return out;
}

}  // namespace rte
