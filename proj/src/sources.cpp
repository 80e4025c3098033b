#include "rte/sources.hpp"

#include <cmath>

#include "rte/errors.hpp"

namespace rte {

namespace {

constexpr double kT = 4e-3;
const Vec2 kC1{0.3, 0.7};
const Vec2 kC2{0.7, 0.3};
const Vec2 kC3{0.6, 0.4};
constexpr double kAnnulusInner = 0.15;
constexpr double kAnnulusOuter = 0.25;

double gaussians(const Vec2& p) {
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * kT);
  return norm * (std::exp(-(p - kC1).squared_norm() / (2.0 * kT)) +
                 std::exp(-(p - kC2).squared_norm() / (2.0 * kT)));
}

double annulus(const Vec2& p) {
  const double r = (p - kC3).norm();
  return (r >= kAnnulusInner && r <= kAnnulusOuter) ? 1.0 : 0.0;
}

double square(const Vec2& p) {
  return (p.x >= 0.5 && p.x <= 0.75 && p.y >= 0.5 && p.y <= 0.75) ? 1.0 : 0.0;
}

}  // namespace

double source_value(int id, const Vec2& p) {
  switch (id) {
    case 1:
      return gaussians(p);
    case 2:
      return annulus(p);
    case 3:
      return square(p);
    default:
      throw InputError("unknown source id " + std::to_string(id) +
                       " (expected 1, 2, or 3)");
  }
}

ScalarField source_field(int id) {
  source_value(id, Vec2{0.5, 0.5});  // validate the id eagerly
  return [id](const Vec2& p) { return source_value(id, p); };
}

std::vector<double> make_source(int id, const Grid& grid) {
  std::vector<double> f(static_cast<size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    f[static_cast<size_t>(i)] = source_value(id, grid.center(i));
  }
  return f;
}

}  // namespace rte
