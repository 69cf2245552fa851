#include "sdf/depth_image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sdf {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary writers assume a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

DepthImage::DepthImage(int height, int width, float fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("DepthImage dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

std::size_t DepthImage::count_invalid() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), kInvalid));
}

void write_pfm(const std::filesystem::path& path, const DepthImage& img) {
  auto out = open_out(path);
  out << "Pf\n" << img.width() << ' ' << img.height() << "\n-1.0\n";
  for (int r = img.height() - 1; r >= 0; --r) {
    for (int c = 0; c < img.width(); ++c) {
      const float v = img.at(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

DepthImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string magic;
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (magic != "Pf" || width <= 0 || height <= 0) {
    throw std::runtime_error("not a single-channel PFM: " + path.string());
  }
  if (scale >= 0.0) throw std::runtime_error("big-endian PFM not supported");
  in.get();  // single whitespace after the scale line
  DepthImage img(height, width);
  for (int r = height - 1; r >= 0; --r) {
    for (int c = 0; c < width; ++c) {
      float v = 0.0f;
      in.read(reinterpret_cast<char*>(&v), sizeof(float));
      img.at(r, c) = v;
    }
  }
  if (!in) throw std::runtime_error("truncated PFM: " + path.string());
  return img;
}

void write_pgm8(const std::filesystem::path& path, const DepthImage& img,
                float max_depth) {
  if (!(max_depth > 0.0f)) throw std::invalid_argument("max_depth must be > 0");
  auto out = open_out(path);
  out << "P5\n# depth_m = value / 255 * " << max_depth << "\n"
      << img.width() << ' ' << img.height() << "\n255\n";
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const float x = std::clamp(img.at(r, c) / max_depth, 0.0f, 1.0f);
      const auto byte = static_cast<std::uint8_t>(std::lround(x * 255.0f));
      out.put(static_cast<char>(byte));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sdf
