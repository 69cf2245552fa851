#ifndef SDF_PERLIN_HPP
#define SDF_PERLIN_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sdf/rng.hpp"

namespace sdf {

/// Five-octave gradient noise sampled on an image grid.
///
/// Octave o is classic 2-D Perlin noise (unit gradients, quintic fade) at
/// frequency 2^o relative to a base lattice of 4 cells across the image width,
/// weighted by 0.5^o. Each octave has its own permutation table and a random
/// sub-cell offset so that pixel centers do not coincide with lattice nodes
/// (where gradient noise is exactly zero). A single octave lies in
/// [-sqrt(0.5), sqrt(0.5)], well inside the [-1, 1] needed for the 1.9375 sum
/// bound.
class PerlinField {
 public:
  static constexpr int kOctaves = 5;
  static constexpr double kPersistence = 0.5;
  static constexpr double kBaseCellsAcrossWidth = 4.0;
  /// sum_{o=0}^{4} 0.5^o
  static constexpr double kAmplitudeBound = 1.9375;

  PerlinField(int height, int width, const DrawSequence& lattice);

  int height() const { return height_; }
  int width() const { return width_; }
  float at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const float> values() const { return values_; }

  /// Continuous multi-octave noise at image coordinates (col, row).
  double sample(double col, double row) const;

 private:
  struct Octave {
    std::array<std::uint8_t, 512> perm;
    double offset_x;
    double offset_y;
  };

  static double gradient_noise(const Octave& oct, double x, double y);

  int height_;
  int width_;
  std::array<Octave, kOctaves> octaves_;
  std::vector<float> values_;
};

}  // namespace sdf

#endif  // SDF_PERLIN_HPP
