#ifndef SDF_COLORMAP_HPP
#define SDF_COLORMAP_HPP

#include <array>
#include <cstdint>
#include <filesystem>

#include "sdf/depth_image.hpp"

namespace sdf {

using Rgb = std::array<std::uint8_t, 3>;

/// Cool-to-warm ramp over [0, max_depth]: purple, blue, teal, yellow, red.
/// Invalid pixels map to black; depths past the range saturate.
Rgb depth_color(float depth, float max_depth = 2.0f);

/// Binary PPM (P6) of the colorized image.
void write_ppm(const std::filesystem::path& path, const DepthImage& img, float max_depth = 2.0f);

}  // namespace sdf

#endif  // SDF_COLORMAP_HPP
