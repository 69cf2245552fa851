#include "sdf/rng.hpp"

#include <cmath>
#include <numbers>

namespace sdf {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t DrawSequence::bits(std::uint64_t i) const {
  return mix64(key_ ^ mix64(i * kGolden + 0x632BE59BD9B4E019ULL));
}

double DrawSequence::uniform(std::uint64_t i) const {
  if (forced_) return *forced_;
  return static_cast<double>(bits(i) >> 11) * kInv53;
}

int DrawSequence::uniform_int(std::uint64_t i, int lo, int hi) const {
  const int span = hi - lo + 1;
  int k = static_cast<int>(uniform(i) * span);
  if (k >= span) k = span - 1;
  return lo + k;
}

double DrawSequence::normal(std::uint64_t i) const {
  if (forced_) return 0.0;
  // u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((bits(2 * i) >> 11) + 1) * kInv53;
  const double u2 = static_cast<double>(bits(2 * i + 1) >> 11) * kInv53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::forced(double uniform_value) {
  RngStream s(0, 0);
  s.forced_ = uniform_value;
  return s;
}

DrawSequence RngStream::at(DrawPurpose purpose, std::uint64_t frame) const {
  std::uint64_t k = mix64(master_seed_ ^ 0xA0761D6478BD642FULL);
  k = mix64(k ^ (env_id_ * 0xE7037ED1A0B428DBULL));
  k = mix64(k ^ (static_cast<std::uint64_t>(purpose) * 0x8EBC6AF09C88C6E3ULL));
  k = mix64(k ^ (frame * 0x589965CC75374CC3ULL));
  return DrawSequence(k, forced_);
}

}  // namespace sdf
