#pragma once

// Geometry of the unit-square domain X = [0,1]^2 and the uniform cell grid
// used by the Nystrom discretization.

#include <cmath>
#include <cstddef>
#include <vector>

#include "rte/errors.hpp"

namespace rte {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2 operator-() const { return {-x, -y}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double a, const Vec2& v) { return {a * v.x, a * v.y}; }

namespace domain {

constexpr double kDiameter = 1.4142135623730951;  // sqrt(2)

inline bool contains(const Vec2& p) {
  return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

}  // namespace domain

// Distance from x to the boundary along the backward ray x - s*v, s >= 0,
// for a unit direction v. This is the path length a particle traveling with
// velocity v has spent inside the domain before reaching x.
double exit_distance(const Vec2& x, const Vec2& v);

// Polar angle of the displacement x - y, in (-pi, pi]. Requires x != y.
double angle_between(const Vec2& x, const Vec2& y);

// Uniform n-by-n grid of cell centers ((i1+1/2)h, (i2+1/2)h), h = 1/n.
// Linear index i = i1 + n*i2: x1 varies fastest.
class Grid {
 public:
  explicit Grid(int n);

  int n() const { return n_; }
  double h() const { return h_; }
  int size() const { return n_ * n_; }
  double cell_volume() const { return h_ * h_; }

  const Vec2& center(int i) const { return centers_[static_cast<size_t>(i)]; }
  const std::vector<Vec2>& centers() const { return centers_; }

  int index(int i1, int i2) const { return i1 + n_ * i2; }
  // Index of the cell whose closed cell contains p (ties go to the higher
  // cell, boundary clamped inward).
  int cell_of(const Vec2& p) const;

 private:
  int n_;
  double h_;
  std::vector<Vec2> centers_;
};

}  // namespace rte
