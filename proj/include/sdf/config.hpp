#ifndef SDF_CONFIG_HPP
#define SDF_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdf/engine.hpp"

namespace sdf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a CLI run needs. Stored on disk as commented `key = value` lines
/// grouped under `[section]` headers:
///
///   [run]      seed, envs, frames, workers, output
///   [terrain]  families (comma list), difficulty, resolution, length, width, seed
///   [rig]      fx, fy, cx, cy, width, height, baseline, mount_height, mount_pitch_deg
///   [augment]  stereo_fusion, random_conv, gaussian_noise, perlin_noise, scale,
///              pixel_failures, delay  (true/false)
///   [walk]     torso_height, start_x, speed, dt
///
/// Unknown sections or keys are errors. Reals are written in shortest
/// round-trip form, so parse(serialize(c)) == c.
struct RunConfig {
  std::uint64_t seed = 0;
  int envs = 1;
  int frames = 1;
  int workers = 1;
  std::string output = "out";

  std::vector<TerrainFamily> families = {TerrainFamily::kStairsUp};
  int difficulty = 19;
  double resolution = 0.05;
  double length = 8.0;
  double width = 4.0;
  std::uint64_t terrain_seed = 0;

  CameraIntrinsics intrinsics;
  double baseline = 0.05;
  double mount_height = 0.65;
  double mount_pitch_deg = 60.0;

  StageToggles toggles;

  double torso_height = 0.75;
  double start_x = 1.0;
  double walk_speed = 0.5;
  double frame_dt = 0.02;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  std::vector<TerrainSpec> terrain_specs() const;
  EngineConfig engine_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&);
};

/// Parses config text. Errors name the line number and offending key.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
std::string serialize_config(const RunConfig& config);

/// Applies SDF_<SECTION>_<KEY> variables (e.g. SDF_RUN_SEED,
/// SDF_TERRAIN_FAMILIES). `getenv` is injectable for tests.
void apply_env_overrides(RunConfig& config,
                         const std::function<const char*(const char*)>& getenv = nullptr);

/// Sets one `section.key` from its text form. Throws ConfigError.
void set_config_value(RunConfig& config, std::string_view section, std::string_view key,
                      std::string_view value);

}  // namespace sdf

#endif  // SDF_CONFIG_HPP
