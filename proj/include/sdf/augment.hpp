#ifndef SDF_AUGMENT_HPP
#define SDF_AUGMENT_HPP

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "sdf/camera.hpp"
#include "sdf/depth_image.hpp"
#include "sdf/perlin.hpp"
#include "sdf/rng.hpp"

namespace sdf {

/// 3x3 kernel, row-major.
using Kernel3 = std::array<double, 9>;
/// Quadratic amplitude model sigma(d) = |c0 + c1 d + c2 d^2|.
using DepthPolynomial = std::array<double, 3>;

inline double noise_amplitude(const DepthPolynomial& c, double d) {
  const double s = c[0] + c[1] * d + c[2] * d * d;
  return s < 0.0 ? -s : s;
}

struct CropMargins {
  int top = 3;
  int bottom = 3;
  int left = 4;
  int right = 4;
};

/// Smallest depth a noise stage may produce; keeps noisy pixels distinct from
/// the invalid sentinel.
inline constexpr float kMinValidDepth = 1e-4f;
inline constexpr double kDisparityEpsilon = 1e-6;

/// Full randomization state of one environment for one frame.
struct AugmentParams {
  double tau = 0.125;                // stereo consistency threshold, U[0.05, 0.20]
  Kernel3 conv_kernel{};             // W, entries U(-0.05, 0.05)
  DepthPolynomial gauss_coeffs{};    // U(-0.03, 0.03)
  DepthPolynomial perlin_coeffs{};   // U(-0.02, 0.02)
  double scale = 1.0;                // U(0.90, 1.10)
  double p_zero = 0.001;
  double p_max = 0.001;
  double clip_min = 0.3;             // m
  double clip_max = 2.0;             // m
  CropMargins crop{};
  int delay_frames = 3;              // U{2, 3, 4}, fixed per environment
};

/// Observation delay, drawn once per environment.
int sample_delay(const RngStream& rng);

/// Parameters for `frame`: the delay comes from the startup draw and is the
/// same for every frame; tau, W, the noise coefficients and the depth scale
/// are redrawn from frame-tagged sequences.
AugmentParams sample_params(const RngStream& rng, std::uint64_t frame);

/// Disparity-consistency fusion. Each valid left pixel is reprojected to
/// u_r = u - fx * b / (d_left + 1e-6) in the right image, the right depth is
/// read with linear interpolation along the row, and the pixel survives only
/// if |d_left - d_right| < tau * d_left. Reprojection outside the image or onto
/// an invalid right pixel invalidates it.
///
/// Throws std::invalid_argument when the images differ in size or b < 0.
DepthImage stereo_fuse(const DepthImage& left, const DepthImage& right, double fx,
                       double baseline, double tau);

/// Convolution with (W + I), edge-replicated. Invalid pixels stay invalid and
/// are left out of their neighbours' sums; the remaining weights are rescaled
/// so their total still equals sum(W + I).
DepthImage random_conv(const DepthImage& img, const Kernel3& w);

/// Additive N(0, sigma(d)^2) on valid pixels; pixel i uses normal draw i.
DepthImage gaussian_noise(const DepthImage& img, const DepthPolynomial& coeffs,
                          const DrawSequence& draws);

/// d + sigma_p(d) * n(u, v) on valid pixels.
DepthImage perlin_noise(const DepthImage& img, const DepthPolynomial& coeffs,
                        const PerlinField& field);

DepthImage scale_depth(const DepthImage& img, double s);

/// Each pixel is zeroed with probability p_zero (uniform draw 2i).
DepthImage dead_pixels(const DepthImage& img, double p_zero, const DrawSequence& draws);
/// Each surviving valid pixel saturates to d_max with probability p_max
/// (uniform draw 2i + 1). Invalid pixels are never revived.
DepthImage saturated_pixels(const DepthImage& img, double p_max, double d_max,
                            const DrawSequence& draws);
DepthImage pixel_failures(const DepthImage& img, double p_zero, double p_max, double d_max,
                          const DrawSequence& draws);

/// Valid pixels are clamped to [d_min, d_max] and mapped to [0, 1]. Invalid
/// pixels map to 0, the same value as d_min.
DepthImage clip_normalize(const DepthImage& img, double d_min, double d_max);

DepthImage crop(const DepthImage& img, const CropMargins& m);

/// Holds the last five processed frames of one environment and emits the one
/// `delay` frames old. Until delay + 1 frames have been pushed it emits the
/// oldest frame it has.
class DelayBuffer {
 public:
  static constexpr int kCapacity = 5;

  explicit DelayBuffer(int delay);

  int delay() const { return delay_; }
  int size() const { return count_; }
  bool warm() const { return count_ >= delay_ + 1; }

  /// Pushes the newest frame and returns the emitted one.
  const DepthImage& push(DepthImage frame);

 private:
  int delay_;
  int count_ = 0;
  int head_ = 0;  // slot of the newest frame
  std::array<DepthImage, kCapacity> ring_;
};

/// Pipeline stages in application order.
enum class Stage : int {
  kStereoFusion = 0,
  kRandomConv,
  kGaussianNoise,
  kPerlinNoise,
  kScale,
  kDeadPixels,
  kSaturatedPixels,
  kClipCrop,
  kDelay,
};
inline constexpr int kNumStages = 9;
std::string_view to_string(Stage stage);

/// Per-operator switches. A disabled stage is the identity.
struct StageToggles {
  bool stereo_fusion = true;
  bool random_conv = true;
  bool gaussian_noise = true;
  bool perlin_noise = true;
  bool scale = true;
  bool pixel_failures = true;
  bool delay = true;
};

/// Intermediate buffers of one frame, in the order the pipeline produces
/// them: the input pair, then eight panels ending with the clipped and
/// cropped output (before the delay buffer).
struct StageTrace {
  DepthImage left;
  DepthImage right;
  DepthImage fused;
  DepthImage conv;
  DepthImage gauss;
  DepthImage perlin;
  DepthImage scaled;
  DepthImage dead;
  DepthImage saturated;
  DepthImage clipped_cropped;
};

/// Accumulated wall time per stage, in seconds.
struct StageTimes {
  std::array<double, kNumStages> seconds{};
  double total() const;
  StageTimes& operator+=(const StageTimes& other);
};

struct FrameOutput {
  DepthImage student;  // augmented, normalized, cropped and delayed
  DepthImage clean;    // left render, normalized and cropped, not delayed
};

/// Mutable per-environment augmentation state: its stream, the startup draws
/// (rig and delay) and the delay buffer. One EnvState must only be used by one
/// thread at a time; distinct EnvStates share nothing.
class EnvState {
 public:
  EnvState(std::uint64_t master_seed, std::uint64_t env_id, const StereoRig& nominal_rig,
           StageToggles toggles = {});

  const RngStream& rng() const { return rng_; }
  const StereoRig& rig() const { return rig_; }
  const StageToggles& toggles() const { return toggles_; }
  int delay_frames() const { return delay_.delay(); }
  std::uint64_t frame() const { return frame_; }

  /// Parameters the next call to augment_frame will use.
  AugmentParams next_params() const;

  /// Test hook applied to freshly sampled parameters before every frame.
  std::function<void(AugmentParams&)> param_override;

 private:
  friend FrameOutput augment_frame(EnvState&, const DepthImage&, const DepthImage&, StageTrace*,
                                   StageTimes*);

  RngStream rng_;
  StereoRig rig_;
  StageToggles toggles_;
  DelayBuffer delay_;
  std::uint64_t frame_ = 0;
};

/// Runs one frame through fusion, convolution, Gaussian noise, Perlin noise,
/// scaling, pixel failures, clipping/normalization and cropping, then through
/// the delay buffer. Advances the environment's frame counter.
FrameOutput augment_frame(EnvState& env, const DepthImage& left_clean,
                          const DepthImage& right_clean, StageTrace* trace = nullptr,
                          StageTimes* times = nullptr);

}  // namespace sdf

#endif  // SDF_AUGMENT_HPP
