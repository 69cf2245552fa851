#ifndef SDF_DEPTH_IMAGE_HPP
#define SDF_DEPTH_IMAGE_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sdf {

/// Row-major grid of metric depth in meters. 0.0 marks an invalid pixel
/// (occlusion, dead pixel, ray miss); every other value is finite and > 0.
class DepthImage {
 public:
  static constexpr float kInvalid = 0.0f;

  DepthImage() = default;
  DepthImage(int height, int width, float fill = kInvalid);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float& at(int row, int col) { return data_[index(row, col)]; }
  float at(int row, int col) const { return data_[index(row, col)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  static bool valid(float d) { return d != kInvalid; }
  std::size_t count_invalid() const;

  bool same_shape(const DepthImage& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const DepthImage&, const DepthImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Portable float map: "Pf" header, little-endian (scale -1.0), rows stored
/// bottom-to-top as the format requires. Lossless.
void write_pfm(const std::filesystem::path& path, const DepthImage& img);
DepthImage read_pfm(const std::filesystem::path& path);

/// 8-bit grayscale PGM. Pixel = round(clamp(d / max_depth, 0, 1) * 255).
/// The scale is recorded in a header comment.
void write_pgm8(const std::filesystem::path& path, const DepthImage& img,
                float max_depth);

}  // namespace sdf

#endif  // SDF_DEPTH_IMAGE_HPP
