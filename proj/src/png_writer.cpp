#include "rte/png_writer.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rte/errors.hpp"

namespace rte {

namespace {

void put_be32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& data) {
  put_be32(out, static_cast<uint32_t>(data.size()));
  const size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc =
      crc32(0L, out.data() + start, static_cast<uInt>(4 + data.size()));
  put_be32(out, static_cast<uint32_t>(crc));
}

// Few-stop gradient, dark blue through green to yellow.
const unsigned char kStops[][3] = {
    {68, 1, 84},   {59, 82, 139},  {33, 145, 140},
    {94, 201, 98}, {253, 231, 37},
};
constexpr int kNumStops = 5;

void colorize(double t, unsigned char* px) {
  t = std::clamp(t, 0.0, 1.0) * (kNumStops - 1);
  const int s = std::min(static_cast<int>(t), kNumStops - 2);
  const double w = t - s;
  for (int c = 0; c < 3; ++c) {
    px[c] = static_cast<unsigned char>(
        std::lround((1.0 - w) * kStops[s][c] + w * kStops[s + 1][c]));
  }
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<size_t>(width) * height * 3) {
    throw InputError("write_png_rgb: dimensions do not match the pixel buffer");
  }

  // Raw image stream: one filter byte (0 = none) before each scanline.
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<size_t>(height) * (1 + 3 * static_cast<size_t>(width)));
  for (int row = 0; row < height; ++row) {
    raw.push_back(0);
    const unsigned char* line = rgb.data() + static_cast<size_t>(row) * width * 3;
    raw.insert(raw.end(), line, line + static_cast<size_t>(width) * 3);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> deflated(bound);
  if (compress2(deflated.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw InputError("write_png_rgb: deflate failed");
  }
  deflated.resize(bound);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  put_be32(ihdr, static_cast<uint32_t>(width));
  put_be32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filtering
  ihdr.push_back(0);  // no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", deflated);
  put_chunk(out, "IEND", {});

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw InputError("cannot open " + tmp + " for writing");
    os.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
    if (!os) throw InputError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw InputError("cannot rename " + tmp + " to " + path);
  }
}

void write_field_png(const std::string& path, const Grid& grid,
                     const std::vector<double>& values, int upscale,
                     int bands) {
  const int n = grid.n();
  if (values.size() != static_cast<size_t>(grid.size())) {
    throw InputError("write_field_png: value count does not match the grid");
  }
  if (upscale < 1) upscale = 1;
  if (bands < 2) bands = 2;

  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn_it;
  const double span = (*mx_it > lo) ? (*mx_it - lo) : 1.0;

  const int w = n * upscale;
  std::vector<unsigned char> rgb(static_cast<size_t>(w) * w * 3);
  for (int py = 0; py < w; ++py) {
    const int i2 = n - 1 - py / upscale;  // image top = largest x2
    for (int px = 0; px < w; ++px) {
      const int i1 = px / upscale;
      const double t0 = (values[static_cast<size_t>(grid.index(i1, i2))] - lo) / span;
      const double banded = std::floor(t0 * bands) / bands;
      colorize(banded, &rgb[(static_cast<size_t>(py) * w + px) * 3]);
    }
  }
  write_png_rgb(path, w, w, rgb);
}

}  // namespace rte
