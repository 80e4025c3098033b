#pragma once

// Minimal PNG emission (8-bit RGB, zlib-deflated, no interlacing) and a
// banded-colormap rendering of a grid field. Plots are a convenience output;
// nothing downstream parses them.

#include <string>
#include <vector>

#include "rte/geometry.hpp"

namespace rte {

// rgb is row-major, top row first, 3 bytes per pixel.
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb);

// Filled-contour style plot: values normalized to their range, quantized to
// discrete bands, colored, and upscaled by an integer pixel factor.
void write_field_png(const std::string& path, const Grid& grid,
                     const std::vector<double>& values, int upscale = 8,
                     int bands = 12);

}  // namespace rte
