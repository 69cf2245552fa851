#include "sdf/colormap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sdf {

namespace {

constexpr std::array<Rgb, 5> kStops = {{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {253, 231, 37},
    {220, 50, 32},
}};

}  // namespace

Rgb depth_color(float depth, float max_depth) {
  if (!DepthImage::valid(depth) || !(max_depth > 0.0f)) return {0, 0, 0};
  const float t = std::clamp(depth / max_depth, 0.0f, 1.0f) * (kStops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), kStops.size() - 2);
  const float f = t - static_cast<float>(k);
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const float v = kStops[k][c] + f * (kStops[k + 1][c] - kStops[k][c]);
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const DepthImage& img, float max_depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * 3);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const Rgb px = depth_color(img.at(r, c), max_depth);
      std::copy(px.begin(), px.end(), row.begin() + 3 * c);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sdf
