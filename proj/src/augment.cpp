#include "sdf/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdf {

int sample_delay(const RngStream& rng) {
  return rng.at(DrawPurpose::kDelay).uniform_int(0, 2, 4);
}

AugmentParams sample_params(const RngStream& rng, std::uint64_t frame) {
  AugmentParams p;
  p.delay_frames = sample_delay(rng);
  p.tau = rng.at(DrawPurpose::kStereoTau, frame).uniform(0, 0.05, 0.20);
  const DrawSequence conv = rng.at(DrawPurpose::kConvKernel, frame);
  for (std::size_t i = 0; i < p.conv_kernel.size(); ++i) {
    p.conv_kernel[i] = conv.uniform(i, -0.05, 0.05);
  }
  const DrawSequence gauss = rng.at(DrawPurpose::kGaussCoeffs, frame);
  const DrawSequence perlin = rng.at(DrawPurpose::kPerlinCoeffs, frame);
  for (std::size_t i = 0; i < 3; ++i) {
    p.gauss_coeffs[i] = gauss.uniform(i, -0.03, 0.03);
    p.perlin_coeffs[i] = perlin.uniform(i, -0.02, 0.02);
  }
  p.scale = rng.at(DrawPurpose::kDepthScale, frame).uniform(0, 0.90, 1.10);
  return p;
}

DepthImage stereo_fuse(const DepthImage& left, const DepthImage& right, double fx,
                       double baseline, double tau) {
  if (!left.same_shape(right)) throw std::invalid_argument("stereo_fuse: image size mismatch");
  if (!(baseline >= 0.0)) throw std::invalid_argument("stereo_fuse: baseline must be >= 0");
  const int w = left.width();
  DepthImage out(left.height(), w);
  const double fb = fx * baseline;
  for (int v = 0; v < left.height(); ++v) {
    for (int u = 0; u < w; ++u) {
      const double dl = left.at(v, u);
      if (!DepthImage::valid(left.at(v, u))) continue;
      const double ur = u - fb / (dl + kDisparityEpsilon);
      if (ur < 0.0 || ur > w - 1) continue;
      const int u0 = static_cast<int>(ur);
      const double t = ur - u0;
      const float r0 = right.at(v, u0);
      if (!DepthImage::valid(r0)) continue;
      double dr = r0;
      if (t > 0.0) {
        const float r1 = right.at(v, u0 + 1);
        if (!DepthImage::valid(r1)) continue;
        dr = (1.0 - t) * r0 + t * r1;
      }
      if (std::abs(dl - dr) < tau * dl) out.at(v, u) = left.at(v, u);
    }
  }
  return out;
}

DepthImage random_conv(const DepthImage& img, const Kernel3& w) {
  Kernel3 k = w;
  k[4] += 1.0;
  double k_sum = 0.0;
  for (double x : k) k_sum += x;

  const int h = img.height();
  const int wd = img.width();
  DepthImage out(h, wd);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < wd; ++c) {
      if (!DepthImage::valid(img.at(r, c))) continue;
      double acc = 0.0;
      double weight = 0.0;
      for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
          // True convolution: kernel tap (i, j) reads the pixel at (-i, -j).
          const float d = img.at(std::clamp(r - i, 0, h - 1), std::clamp(c - j, 0, wd - 1));
          if (!DepthImage::valid(d)) continue;
          const double kij = k[static_cast<std::size_t>((i + 1) * 3 + (j + 1))];
          acc += kij * d;
          weight += kij;
        }
      }
      double value = acc;
      if (weight != k_sum) value = acc * k_sum / weight;
      out.at(r, c) = std::max(static_cast<float>(value), kMinValidDepth);
    }
  }
  return out;
}

DepthImage gaussian_noise(const DepthImage& img, const DepthPolynomial& coeffs,
                          const DrawSequence& draws) {
  DepthImage out = img;
  if (coeffs[0] == 0.0 && coeffs[1] == 0.0 && coeffs[2] == 0.0) return out;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = data[i];
    if (!DepthImage::valid(data[i])) continue;
    const double noisy = d + noise_amplitude(coeffs, d) * draws.normal(i);
    data[i] = std::max(static_cast<float>(noisy), kMinValidDepth);
  }
  return out;
}

DepthImage perlin_noise(const DepthImage& img, const DepthPolynomial& coeffs,
                        const PerlinField& field) {
  if (field.height() != img.height() || field.width() != img.width()) {
    throw std::invalid_argument("perlin_noise: field size does not match image");
  }
  DepthImage out = img;
  if (coeffs[0] == 0.0 && coeffs[1] == 0.0 && coeffs[2] == 0.0) return out;
  auto data = out.data();
  const auto noise = field.values();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = data[i];
    if (!DepthImage::valid(data[i])) continue;
    const double noisy = d + noise_amplitude(coeffs, d) * noise[i];
    data[i] = std::max(static_cast<float>(noisy), kMinValidDepth);
  }
  return out;
}

DepthImage scale_depth(const DepthImage& img, double s) {
  DepthImage out = img;
  if (s == 1.0) return out;
  for (float& d : out.data()) {
    if (DepthImage::valid(d)) d = static_cast<float>(d * s);
  }
  return out;
}

DepthImage dead_pixels(const DepthImage& img, double p_zero, const DrawSequence& draws) {
  DepthImage out = img;
  if (p_zero <= 0.0) return out;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (draws.uniform(2 * i) < p_zero) data[i] = DepthImage::kInvalid;
  }
  return out;
}

DepthImage saturated_pixels(const DepthImage& img, double p_max, double d_max,
                            const DrawSequence& draws) {
  DepthImage out = img;
  if (p_max <= 0.0) return out;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (DepthImage::valid(data[i]) && draws.uniform(2 * i + 1) < p_max) {
      data[i] = static_cast<float>(d_max);
    }
  }
  return out;
}

DepthImage pixel_failures(const DepthImage& img, double p_zero, double p_max, double d_max,
                          const DrawSequence& draws) {
  if (p_zero < 0.0 || p_zero > 1.0 || p_max < 0.0 || p_max > 1.0) {
    throw std::invalid_argument("pixel_failures: probabilities must be in [0, 1]");
  }
  return saturated_pixels(dead_pixels(img, p_zero, draws), p_max, d_max, draws);
}

DepthImage clip_normalize(const DepthImage& img, double d_min, double d_max) {
  if (!(d_min < d_max)) throw std::invalid_argument("clip_normalize: need d_min < d_max");
  DepthImage out = img;
  const double inv = 1.0 / (d_max - d_min);
  for (float& d : out.data()) {
    if (!DepthImage::valid(d)) continue;
    d = static_cast<float>((std::clamp<double>(d, d_min, d_max) - d_min) * inv);
  }
  return out;
}

DepthImage crop(const DepthImage& img, const CropMargins& m) {
  if (m.top < 0 || m.bottom < 0 || m.left < 0 || m.right < 0) {
    throw std::invalid_argument("crop: negative margin");
  }
  const int h = img.height() - m.top - m.bottom;
  const int w = img.width() - m.left - m.right;
  if (h < 1 || w < 1) throw std::invalid_argument("crop: margins exceed image size");
  DepthImage out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(r + m.top, c + m.left);
  }
  return out;
}

DelayBuffer::DelayBuffer(int delay) : delay_(delay) {
  if (delay < 0 || delay >= kCapacity) {
    throw std::invalid_argument("delay must be in [0, " + std::to_string(kCapacity - 1) + "]");
  }
}

const DepthImage& DelayBuffer::push(DepthImage frame) {
  head_ = count_ == 0 ? 0 : (head_ + 1) % kCapacity;
  ring_[static_cast<std::size_t>(head_)] = std::move(frame);
  count_ = std::min(count_ + 1, kCapacity);
  const int back = std::min(delay_, count_ - 1);
  return ring_[static_cast<std::size_t>((head_ - back + kCapacity) % kCapacity)];
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kStereoFusion: return "stereo_fusion";
    case Stage::kRandomConv: return "random_conv";
    case Stage::kGaussianNoise: return "gaussian_noise";
    case Stage::kPerlinNoise: return "perlin_noise";
    case Stage::kScale: return "scale";
    case Stage::kDeadPixels: return "dead_pixels";
    case Stage::kSaturatedPixels: return "saturated_pixels";
    case Stage::kClipCrop: return "clip_crop";
    case Stage::kDelay: return "delay";
  }
  return "unknown";
}

double StageTimes::total() const {
  double t = 0.0;
  for (double s : seconds) t += s;
  return t;
}

StageTimes& StageTimes::operator+=(const StageTimes& other) {
  for (std::size_t i = 0; i < seconds.size(); ++i) seconds[i] += other.seconds[i];
  return *this;
}

EnvState::EnvState(std::uint64_t master_seed, std::uint64_t env_id, const StereoRig& nominal_rig,
                   StageToggles toggles)
    : rng_(master_seed, env_id),
      rig_(sample_rig(nominal_rig, rng_)),
      toggles_(toggles),
      delay_(toggles.delay ? sample_delay(rng_) : 0) {
  rig_.validate();
}

AugmentParams EnvState::next_params() const {
  AugmentParams p = sample_params(rng_, frame_);
  if (!toggles_.delay) p.delay_frames = 0;
  if (param_override) param_override(p);
  return p;
}

namespace {

class StageClock {
 public:
  explicit StageClock(StageTimes* times) : times_(times) {
    if (times_) last_ = std::chrono::steady_clock::now();
  }
  void lap(Stage stage) {
    if (!times_) return;
    const auto now = std::chrono::steady_clock::now();
    times_->seconds[static_cast<std::size_t>(stage)] +=
        std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  StageTimes* times_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

FrameOutput augment_frame(EnvState& env, const DepthImage& left_clean,
                          const DepthImage& right_clean, StageTrace* trace, StageTimes* times) {
  if (!left_clean.same_shape(right_clean)) {
    throw std::invalid_argument("augment_frame: left/right size mismatch");
  }
  const AugmentParams p = env.next_params();
  if (p.delay_frames != env.delay_.delay()) {
    env.delay_ = DelayBuffer(p.delay_frames);
  }
  const StageToggles& on = env.toggles_;
  const std::uint64_t frame = env.frame_;
  StageClock clock(times);

  DepthImage fused = on.stereo_fusion
                         ? stereo_fuse(left_clean, right_clean, env.rig_.left.intrinsics.fx,
                                       env.rig_.baseline, p.tau)
                         : left_clean;
  clock.lap(Stage::kStereoFusion);
  DepthImage conv = on.random_conv ? random_conv(fused, p.conv_kernel) : fused;
  clock.lap(Stage::kRandomConv);
  DepthImage gauss = on.gaussian_noise
                         ? gaussian_noise(conv, p.gauss_coeffs,
                                          env.rng_.at(DrawPurpose::kGaussNoise, frame))
                         : conv;
  clock.lap(Stage::kGaussianNoise);
  DepthImage perlin = gauss;
  if (on.perlin_noise) {
    const PerlinField field(gauss.height(), gauss.width(),
                            env.rng_.at(DrawPurpose::kPerlinLattice, frame));
    perlin = perlin_noise(gauss, p.perlin_coeffs, field);
  }
  clock.lap(Stage::kPerlinNoise);
  DepthImage scaled = on.scale ? scale_depth(perlin, p.scale) : perlin;
  clock.lap(Stage::kScale);
  const DrawSequence failures = env.rng_.at(DrawPurpose::kPixelFailures, frame);
  DepthImage dead = on.pixel_failures ? dead_pixels(scaled, p.p_zero, failures) : scaled;
  clock.lap(Stage::kDeadPixels);
  DepthImage saturated =
      on.pixel_failures ? saturated_pixels(dead, p.p_max, p.clip_max, failures) : dead;
  clock.lap(Stage::kSaturatedPixels);
  DepthImage processed = crop(clip_normalize(saturated, p.clip_min, p.clip_max), p.crop);
  FrameOutput out;
  out.clean = crop(clip_normalize(left_clean, p.clip_min, p.clip_max), p.crop);
  clock.lap(Stage::kClipCrop);

  if (trace) {
    trace->left = left_clean;
    trace->right = right_clean;
    trace->fused = fused;
    trace->conv = conv;
    trace->gauss = gauss;
    trace->perlin = perlin;
    trace->scaled = scaled;
    trace->dead = dead;
    trace->saturated = saturated;
    trace->clipped_cropped = processed;
  }
  out.student = env.delay_.push(std::move(processed));
  clock.lap(Stage::kDelay);
  ++env.frame_;
  return out;
}

}  // namespace sdf
