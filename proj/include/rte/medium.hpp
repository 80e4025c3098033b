#pragma once

// Optical coefficients mu_s (scattering) and mu_t (total = scattering +
// absorption) on the unit square, and the optical attenuation factor
//
//   E(x,y) = exp( -|x-y| * int_0^1 mu_t(x - s(x-y)) ds )
//
// evaluated with a fixed Gauss-Legendre rule along the segment.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rte/geometry.hpp"
#include "rte/quadrature.hpp"

namespace rte {

using ScalarField = std::function<double(const Vec2&)>;

// Values on the cell-center lattice of an n-by-n grid, sampled anywhere by
// bilinear interpolation (clamped at the boundary ring).
class GriddedField {
 public:
  GriddedField(int n, std::vector<double> values);

  static GriddedField from_csv(const std::string& path);
  static GriddedField from_binary(const std::string& path, int n);

  double operator()(const Vec2& p) const;
  int n() const { return n_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int n_;
  double h_;
  std::vector<double> values_;
};

class Medium {
 public:
  static Medium homogeneous(double mu_s, double mu_t);
  // Generic callable coefficients. sup_mu_s, if known analytically, feeds the
  // diagnostic constants; otherwise it is estimated on a fine probe grid.
  static Medium from_fields(ScalarField mu_s, ScalarField mu_t,
                            std::optional<double> sup_mu_s = std::nullopt);
  // mu_s(x) = 1 + rho*exp(-|x-c|^2/4), c = (1/2,1/2); mu_t = mu_s + mu_a.
  static Medium gaussian_bump(double rho, double mu_a);
  static Medium from_gridded(GriddedField mu_s, GriddedField mu_t);

  double mu_s(const Vec2& p) const { return mu_s_(p); }
  double mu_t(const Vec2& p) const { return mu_t_(p); }

  bool is_homogeneous() const { return homogeneous_; }
  // Constant values; only meaningful when is_homogeneous().
  double const_mu_s() const { return const_mu_s_; }
  double const_mu_t() const { return const_mu_t_; }

  // sup over the domain of mu_s: analytic when the construction knows it,
  // else the max over a 257x257 probe grid.
  double sup_mu_s() const;

  // Coefficient sanity on the cell centers of g: nonnegative, mu_t >= mu_s.
  void validate(const Grid& g) const;

 private:
  Medium() = default;

  ScalarField mu_s_;
  ScalarField mu_t_;
  bool homogeneous_ = false;
  double const_mu_s_ = 0.0;
  double const_mu_t_ = 0.0;
  mutable std::optional<double> sup_mu_s_;

  void check_samples() const;
};

// E(x,y) above; returns 1 when x == y. The rule must be a [0,1] rule with
// weights summing to 1 (gauss_legendre_01), which makes the value exact for
// constant mu_t and exactly symmetric in (x,y) for any mu_t.
double optical_factor(const Medium& m, const QuadratureRule& line_rule,
                      const Vec2& x, const Vec2& y);

}  // namespace rte
