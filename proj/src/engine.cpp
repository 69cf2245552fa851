#include "sdf/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace sdf {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

BatchEngine::BatchEngine(EngineConfig config) : config_(std::move(config)) {
  if (config_.env_count < 1) throw std::invalid_argument("env_count must be >= 1");
  if (config_.terrains.empty()) throw std::invalid_argument("at least one terrain spec required");
  config_.nominal_rig.validate();
  if (!config_.heightfields.empty()) {
    if (config_.heightfields.size() != config_.terrains.size()) {
      throw std::invalid_argument("one heightfield per terrain spec required");
    }
    for (Heightfield& field : config_.heightfields) {
      terrains_.push_back(std::make_shared<const Heightfield>(std::move(field)));
    }
    config_.heightfields.clear();
  } else {
    for (const TerrainSpec& spec : config_.terrains) {
      terrains_.push_back(std::make_shared<const Heightfield>(make_terrain(spec)));
    }
  }
  envs_.reserve(static_cast<std::size_t>(config_.env_count));
  for (int i = 0; i < config_.env_count; ++i) {
    envs_.push_back(std::make_unique<EnvState>(config_.master_seed, static_cast<std::uint64_t>(i),
                                               config_.nominal_rig, config_.toggles));
  }
}

const Heightfield& BatchEngine::terrain(std::size_t env_id) const {
  return *terrains_[env_id % terrains_.size()];
}

const TerrainSpec& BatchEngine::terrain_spec(std::size_t env_id) const {
  return config_.terrains[env_id % config_.terrains.size()];
}

Pose BatchEngine::scripted_pose(std::size_t env_id, std::uint64_t frame) const {
  const Heightfield& field = terrain(env_id);
  // Keep the 4 m view inside the field: stop 3 m short of the far edge.
  const double span = std::max(field.max_x() - 3.0 - config_.start_x, config_.frame_dt);
  const double travel = config_.walk_speed * config_.frame_dt * static_cast<double>(frame);
  const double x = config_.start_x + std::fmod(travel, span);
  const double y = 0.0;
  // The torso rides on the highest ground under the stance, so it spans gaps.
  double ground = field.height_at(x, y);
  for (int k = -6; k <= 6; ++k) ground = std::max(ground, field.height_at(x + 0.05 * k, y));
  Pose p;
  p.position = Eigen::Vector3d(x, y, ground + config_.torso_height);
  return p;
}

BatchOutput BatchEngine::process(std::span<const std::size_t> env_ids,
                                 std::span<const StereoPair> pairs) {
  if (env_ids.size() != pairs.size()) {
    throw std::invalid_argument("process: one stereo pair per environment id");
  }
  return run(env_ids, {}, pairs);
}

BatchOutput BatchEngine::step(std::span<const Pose> poses) {
  if (poses.size() != envs_.size()) throw std::invalid_argument("step: one pose per environment");
  std::vector<std::size_t> ids(envs_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return run(ids, poses, {});
}

BatchOutput BatchEngine::step() {
  std::vector<Pose> poses(envs_.size());
  for (std::size_t i = 0; i < poses.size(); ++i) poses[i] = scripted_pose(i, envs_[i]->frame());
  return step(poses);
}

BatchOutput BatchEngine::run(std::span<const std::size_t> env_ids, std::span<const Pose> poses,
                             std::span<const StereoPair> pairs) {
  std::vector<bool> seen(envs_.size(), false);
  for (std::size_t id : env_ids) {
    if (id >= envs_.size()) throw std::invalid_argument("env id out of range: " + std::to_string(id));
    if (seen[id]) throw std::invalid_argument("duplicate env id: " + std::to_string(id));
    seen[id] = true;
  }

  const std::size_t n = env_ids.size();
  BatchOutput out{Tensor4(n, 1, kObsHeight, kObsWidth), Tensor4(n, 1, kObsHeight, kObsWidth)};
  std::vector<EngineTimes> per_env(timing_ ? n : 0);

  parallel_for(n, config_.workers, [&](std::size_t k) {
    using Clock = std::chrono::steady_clock;
    const std::size_t id = env_ids[k];
    EnvState& env = *envs_[id];
    const auto t0 = Clock::now();

    StereoPair rendered;
    const StereoPair* pair = nullptr;
    if (!pairs.empty()) {
      pair = &pairs[k];
    } else {
      rendered = render_stereo(terrain(id), poses[k], env.rig(), config_.render);
      pair = &rendered;
    }
    const auto t1 = Clock::now();

    StageTrace* trace = (trace_ && trace_env_ == id) ? trace_ : nullptr;
    StageTimes* stage_times = timing_ ? &per_env[k].stages : nullptr;
    FrameOutput frame = augment_frame(env, pair->left, pair->right, trace, stage_times);
    if (frame.student.height() != kObsHeight || frame.student.width() != kObsWidth) {
      throw std::runtime_error("augment produced " + std::to_string(frame.student.height()) + "x" +
                               std::to_string(frame.student.width()) + ", expected 24x32");
    }
    std::memcpy(out.student.item(k).data(), frame.student.data().data(),
                sizeof(float) * out.student.item_size());
    std::memcpy(out.clean.item(k).data(), frame.clean.data().data(),
                sizeof(float) * out.clean.item_size());
    if (timing_) {
      const auto t2 = Clock::now();
      per_env[k].render = std::chrono::duration<double>(t1 - t0).count();
      per_env[k].env_total = std::chrono::duration<double>(t2 - t0).count();
    }
  });

  for (const EngineTimes& t : per_env) {
    times_.render += t.render;
    times_.stages += t.stages;
    times_.env_total += t.env_total;
  }
  return out;
}

}  // namespace sdf
