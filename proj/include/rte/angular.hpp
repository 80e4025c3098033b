#pragma once

// Angular model reduction: the Fourier mode truncation set, modal solution
// container, and reconstruction of the scattering term and photon flux from
// the modal mean densities.

#include <complex>
#include <vector>

#include "rte/geometry.hpp"
#include "rte/medium.hpp"
#include "rte/phase.hpp"

namespace rte {

class ModeSet {
 public:
  // Sorted, deduplicated; 0 is required to be present.
  static ModeSet from_list(std::vector<int> modes);
  // {-kmax, ..., kmax}.
  static ModeSet symmetric(int kmax);

  int count() const { return static_cast<int>(modes_.size()); }
  const std::vector<int>& modes() const { return modes_; }
  int mode(int idx) const { return modes_[static_cast<size_t>(idx)]; }
  bool contains(int k) const;
  int index_of(int k) const;  // throws InputError when k is not in the set
  // Every k has -k in the set.
  bool is_symmetric() const;

 private:
  std::vector<int> modes_;
};

// sigma_hat(x, k) by the periodic trapezoid rule (delegates to the phase
// function's own representation, which is exact for analytic coefficients).
Complex fourier_sigma(const PhaseFunction& phase, const Vec2& x, int k,
                      int n_theta = 256);

// {k : sup over probes of |sigma_hat(x,k)| > threshold} union {0}, with
// |k| <= max_bandwidth.
ModeSet select_modes(const PhaseFunction& phase,
                     const std::vector<Vec2>& probes, double threshold,
                     int max_bandwidth = 16);

// Modal mean densities Phi_hat(x_i, k) on the grid, mode-blocked: block m is
// the field for modes.mode(m) over all cells (cell index fastest).
class ModalSolution {
 public:
  ModalSolution(Grid grid, ModeSet modes);

  const Grid& grid() const { return grid_; }
  const ModeSet& modes() const { return modes_; }

  Complex& at(int cell, int mode_idx) {
    return data_[static_cast<size_t>(mode_idx) * grid_.size() + cell];
  }
  Complex at(int cell, int mode_idx) const {
    return data_[static_cast<size_t>(mode_idx) * grid_.size() + cell];
  }
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  // Nearest-cell-center evaluation of mode k at p.
  Complex value(const Vec2& p, int k) const;

  // Real part of the k = 0 block (the isotropic mean density u); the
  // imaginary part must be a solver-level residual.
  std::vector<double> mode0_real() const;

 private:
  Grid grid_;
  ModeSet modes_;
  std::vector<Complex> data_;
};

// S(x, theta_v) = mu_s(x) * sum_k e^{i k theta_v} sigma_hat(x,k) Phi_hat(x,k).
// The imaginary residual of the sum must stay below imag_tol (consistency of
// the conjugate symmetry); the real part is returned.
double scattering_term(const ModalSolution& modal, const Medium& medium,
                       const PhaseFunction& phase, const Vec2& x,
                       double theta_v, double imag_tol = 1e-10);

// Photon flux by integrating the attenuated source along the incoming
// characteristic:
//   Phi(x,v) = int_0^tau exp(-int_0^s mu_t(x-s'v) ds') (S+f)(x-sv, v) ds
// with composite Gauss-Legendre on n_panels panels of 4 nodes each.
double reconstruct_flux(const ModalSolution& modal, const Medium& medium,
                        const PhaseFunction& phase, const ScalarField& f,
                        const Vec2& x, const Vec2& v, int n_panels,
                        double imag_tol = 1e-10);

}  // namespace rte
