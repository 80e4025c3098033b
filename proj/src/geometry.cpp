#include "rte/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace rte {

double exit_distance(const Vec2& x, const Vec2& v) {
  if (!domain::contains(x)) {
    throw InputError("exit_distance: point (" + std::to_string(x.x) + ", " +
                     std::to_string(x.y) + ") outside [0,1]^2");
  }
  const double vlen = v.norm();
  if (std::abs(vlen - 1.0) > 1e-12) {
    throw InputError("exit_distance: direction must be unit length, got |v| = " +
                     std::to_string(vlen));
  }

  // Along x - s*v each coordinate moves at rate -v_c; it hits the face
  // {c = 0} if v_c > 0 and {c = 1} if v_c < 0.
  double tau = std::numeric_limits<double>::infinity();
  auto axis = [&tau](double xc, double vc) {
    if (vc > 0.0) {
      tau = std::min(tau, xc / vc);
    } else if (vc < 0.0) {
      tau = std::min(tau, (xc - 1.0) / vc);
    }
  };
  axis(x.x, v.x);
  axis(x.y, v.y);
  return tau;
}

double angle_between(const Vec2& x, const Vec2& y) {
  if (x == y) {
    throw InputError("angle_between: coincident points");
  }
  return std::atan2(x.y - y.y, x.x - y.x);
}

Grid::Grid(int n) : n_(n), h_(1.0 / n) {
  if (n < 1) {
    throw InputError("Grid: n must be >= 1, got " + std::to_string(n));
  }
  centers_.reserve(static_cast<size_t>(n) * n);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      centers_.emplace_back((i1 + 0.5) * h_, (i2 + 0.5) * h_);
    }
  }
}

int Grid::cell_of(const Vec2& p) const {
  auto clampi = [this](double c) {
    int i = static_cast<int>(std::floor(c * n_));
    return std::clamp(i, 0, n_ - 1);
  };
  return index(clampi(p.x), clampi(p.y));
}

}  // namespace rte
