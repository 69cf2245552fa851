#ifndef SDF_ENGINE_HPP
#define SDF_ENGINE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "sdf/augment.hpp"
#include "sdf/camera.hpp"
#include "sdf/terrain.hpp"

namespace sdf {

/// Runs fn(i) for i in [0, n) on `workers` threads (0 = hardware concurrency)
/// using contiguous static chunks. fn must not touch state shared between
/// indices.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Contiguous f32 tensor, row-major, shape (N, C, H, W).
struct Tensor4 {
  std::array<std::size_t, 4> shape{};
  std::vector<float> data;

  Tensor4() = default;
  Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w)
      : shape{n, c, h, w}, data(n * c * h * w, 0.0f) {}

  std::size_t item_size() const { return shape[1] * shape[2] * shape[3]; }
  std::span<float> item(std::size_t i) { return {data.data() + i * item_size(), item_size()}; }
  std::span<const float> item(std::size_t i) const {
    return {data.data() + i * item_size(), item_size()};
  }
};

/// One batch step: both branches as N x 1 x 24 x 32 tensors, env-major, in
/// the order of the requested environments. Byte layout: element
/// (n, 0, r, c) lives at float offset ((n * 1 + 0) * 24 + r) * 32 + c.
struct BatchOutput {
  Tensor4 student;
  Tensor4 clean;
};

struct EngineTimes {
  double render = 0.0;        // s, summed over envs
  StageTimes stages;          // s, summed over envs
  double env_total = 0.0;     // s, per-env wall time of render + augment, summed
};

struct EngineConfig {
  std::uint64_t master_seed = 0;
  int env_count = 1;
  /// Environment i runs on terrains[i % terrains.size()].
  std::vector<TerrainSpec> terrains = {TerrainSpec{}};
  /// When non-empty, used instead of generating from `terrains` (which then
  /// only labels them). Must have the same length as `terrains`.
  std::vector<Heightfield> heightfields;
  StereoRig nominal_rig;
  StageToggles toggles;
  RenderOptions render;
  int workers = 1;

  // Scripted walk used when no poses are supplied.
  double torso_height = 0.75;  // m above ground
  double start_x = 1.0;        // m
  double walk_speed = 0.5;     // m/s
  double frame_dt = 0.02;      // s (50 Hz)
};

/// Owns terrains and per-environment augmentation state for a batch of
/// environments. Environments are independent, so results do not depend on
/// the worker count or scheduling order.
class BatchEngine {
 public:
  explicit BatchEngine(EngineConfig config);

  const EngineConfig& config() const { return config_; }
  std::size_t env_count() const { return envs_.size(); }
  EnvState& env(std::size_t i) { return *envs_.at(i); }
  const EnvState& env(std::size_t i) const { return *envs_.at(i); }
  const Heightfield& terrain(std::size_t env_id) const;
  const TerrainSpec& terrain_spec(std::size_t env_id) const;

  /// Scripted torso pose: walk along +x at walk_speed, wrapping back to
  /// start_x before the camera window leaves the field.
  Pose scripted_pose(std::size_t env_id, std::uint64_t frame) const;

  /// Augments externally rendered clean pairs for a subset of environments.
  /// Throws std::invalid_argument on duplicate or out-of-range ids.
  BatchOutput process(std::span<const std::size_t> env_ids, std::span<const StereoPair> pairs);

  /// Renders and augments one frame for every environment at `poses`
  /// (one per environment).
  BatchOutput step(std::span<const Pose> poses);
  /// Same, at the scripted poses for each environment's current frame.
  BatchOutput step();

  /// Captures the intermediate buffers of one environment on the next step.
  void trace_env(std::size_t env_id, StageTrace* trace) {
    trace_env_ = env_id;
    trace_ = trace;
  }

  /// Times accumulated since construction or the last reset.
  const EngineTimes& times() const { return times_; }
  void reset_times() { times_ = {}; }
  void set_timing(bool on) { timing_ = on; }

 private:
  BatchOutput run(std::span<const std::size_t> env_ids, std::span<const Pose> poses,
                  std::span<const StereoPair> pairs);

  EngineConfig config_;
  std::vector<std::shared_ptr<const Heightfield>> terrains_;
  std::vector<std::unique_ptr<EnvState>> envs_;
  std::size_t trace_env_ = 0;
  StageTrace* trace_ = nullptr;
  bool timing_ = false;
  EngineTimes times_;
};

inline constexpr int kObsHeight = 24;
inline constexpr int kObsWidth = 32;

}  // namespace sdf

#endif  // SDF_ENGINE_HPP
