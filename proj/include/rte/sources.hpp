#pragma once

// The three benchmark source terms:
//   f1: two normalized Gaussians, T = 4e-3, centers (0.3,0.7) and (0.7,0.3)
//   f2: indicator of the annulus 3/20 <= |x - (3/5,2/5)| <= 1/4
//   f3: indicator of the square [1/2,3/4]^2

#include <vector>

#include "rte/geometry.hpp"
#include "rte/medium.hpp"

namespace rte {

double source_value(int id, const Vec2& p);  // id in {1,2,3}
ScalarField source_field(int id);
std::vector<double> make_source(int id, const Grid& grid);

}  // namespace rte
