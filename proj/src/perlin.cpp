#include "sdf/perlin.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace sdf {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Eight unit gradients at 45 degree increments.
constexpr std::array<std::array<double, 2>, 8> kGradients = {{
    {1.0, 0.0},
    {kInvSqrt2, kInvSqrt2},
    {0.0, 1.0},
    {-kInvSqrt2, kInvSqrt2},
    {-1.0, 0.0},
    {-kInvSqrt2, -kInvSqrt2},
    {0.0, -1.0},
    {kInvSqrt2, -kInvSqrt2},
}};

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

}  // namespace

PerlinField::PerlinField(int height, int width, const DrawSequence& lattice)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("PerlinField needs a positive size");
  std::uint64_t draw = 0;
  for (Octave& oct : octaves_) {
    std::array<std::uint8_t, 256> p;
    std::iota(p.begin(), p.end(), std::uint8_t{0});
    for (int i = 255; i > 0; --i) {
      const int j = lattice.uniform_int(draw++, 0, i);
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    for (std::size_t i = 0; i < 512; ++i) oct.perm[i] = p[i & 255];
    oct.offset_x = lattice.uniform(draw++);
    oct.offset_y = lattice.uniform(draw++);
  }

  values_.resize(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      values_[static_cast<std::size_t>(r) * width + c] = static_cast<float>(sample(c, r));
    }
  }
}

double PerlinField::gradient_noise(const Octave& oct, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int xi = static_cast<int>(static_cast<long long>(fx) & 255);
  const int yi = static_cast<int>(static_cast<long long>(fy) & 255);
  const double tx = x - fx;
  const double ty = y - fy;

  auto corner = [&](int dx, int dy) {
    const int h = oct.perm[static_cast<std::size_t>(oct.perm[static_cast<std::size_t>(xi + dx)] + yi + dy)] & 7;
    const auto& g = kGradients[static_cast<std::size_t>(h)];
    return g[0] * (tx - dx) + g[1] * (ty - dy);
  };

  const double u = fade(tx);
  const double v = fade(ty);
  const double n00 = corner(0, 0);
  const double n10 = corner(1, 0);
  const double n01 = corner(0, 1);
  const double n11 = corner(1, 1);
  const double nx0 = n00 + u * (n10 - n00);
  const double nx1 = n01 + u * (n11 - n01);
  return nx0 + v * (nx1 - nx0);
}

double PerlinField::sample(double col, double row) const {
  const double base = kBaseCellsAcrossWidth / width_;
  double sum = 0.0;
  double amplitude = 1.0;
  double frequency = base;
  for (const Octave& oct : octaves_) {
    sum += amplitude * gradient_noise(oct, col * frequency + oct.offset_x, row * frequency + oct.offset_y);
    amplitude *= kPersistence;
    frequency *= 2.0;
  }
  return sum;
}

}  // namespace sdf
