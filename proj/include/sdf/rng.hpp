#ifndef SDF_RNG_HPP
#define SDF_RNG_HPP

#include <cstdint>
#include <optional>

namespace sdf {

/// Purpose tags partition the draw space of a stream. Two different tags never
/// observe the same underlying bits.
enum class DrawPurpose : std::uint32_t {
  kRigIntrinsics = 1,
  kRigExtrinsics = 2,
  kDelay = 3,
  kStereoTau = 10,
  kConvKernel = 11,
  kGaussCoeffs = 12,
  kGaussNoise = 13,
  kPerlinCoeffs = 14,
  kPerlinLattice = 15,
  kDepthScale = 16,
  kPixelFailures = 17,
  kTerrain = 30,
  kUser = 1000,
};

/// A fixed (master_seed, env_id, purpose, frame) key. Draw i is a pure function
/// of the key and i, so sequences can be evaluated in any order.
class DrawSequence {
 public:
  DrawSequence(std::uint64_t key, std::optional<double> forced)
      : key_(key), forced_(forced) {}

  /// Raw 64 random bits for index i.
  std::uint64_t bits(std::uint64_t i) const;
  /// Uniform in [0, 1).
  double uniform(std::uint64_t i) const;
  /// Uniform in [lo, hi).
  double uniform(std::uint64_t i, double lo, double hi) const {
    return lo + (hi - lo) * uniform(i);
  }
  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(std::uint64_t i, int lo, int hi) const;
  /// Standard normal via Box-Muller; consumes the bit streams at 2i and 2i+1.
  double normal(std::uint64_t i) const;

 private:
  std::uint64_t key_;
  std::optional<double> forced_;
};

/// Counter-based random stream owned by one environment.
///
/// There is no hidden state: every draw is addressed by
/// (master_seed, env_id, purpose, frame, index). This is what makes batched
/// runs independent of worker count and scheduling order.
///
/// A forced stream returns the same uniform value for every draw (and 0 for
/// normal draws); it is used to pin randomizations at known points such as
/// the midpoint of every range.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t env_id)
      : master_seed_(master_seed), env_id_(env_id) {}

  static RngStream forced(double uniform_value);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t env_id() const { return env_id_; }
  bool is_forced() const { return forced_.has_value(); }

  DrawSequence at(DrawPurpose purpose, std::uint64_t frame = 0) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t env_id_;
  std::optional<double> forced_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace sdf

#endif  // SDF_RNG_HPP
