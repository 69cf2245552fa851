#include "sdf/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sdf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T v{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

struct Field {
  const char* section;
  const char* key;
  const char* comment;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
};

template <typename T>
Field number(const char* section, const char* key, const char* comment, T RunConfig::*member) {
  return {section, key, comment,
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          },
          [member](RunConfig& c, std::string_view v, std::string_view k) {
            c.*member = parse_number<T>(v, k);
          }};
}

Field toggle(const char* key, bool StageToggles::*member) {
  return {"augment", key, nullptr,
          [member](const RunConfig& c) { return std::string((c.toggles.*member) ? "true" : "false"); },
          [member](RunConfig& c, std::string_view v, std::string_view k) {
            c.toggles.*member = parse_bool(v, k);
          }};
}

template <typename T>
Field intrinsic(const char* key, const char* comment, T CameraIntrinsics::*member) {
  return {"rig", key, comment,
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.intrinsics.*member);
            } else {
              return std::to_string(c.intrinsics.*member);
            }
          },
          [member](RunConfig& c, std::string_view v, std::string_view k) {
            c.intrinsics.*member = parse_number<T>(v, k);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      number("run", "seed", "master seed for every random stream", &RunConfig::seed),
      number("run", "envs", "number of parallel environments", &RunConfig::envs),
      number("run", "frames", "frames per environment", &RunConfig::frames),
      number("run", "workers", "worker threads (0 = all cores)", &RunConfig::workers),
      {"run", "output", "output directory",
       [](const RunConfig& c) { return c.output; },
       [](RunConfig& c, std::string_view v, std::string_view) { c.output = std::string(v); }},
      {"terrain", "families", "comma-separated; env i uses family i mod count",
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.families.size(); ++i) {
           if (i) s += ",";
           s += to_string(c.families[i]);
         }
         return s;
       },
       [](RunConfig& c, std::string_view v, std::string_view k) {
         std::vector<TerrainFamily> out;
         while (!v.empty()) {
           const auto comma = v.find(',');
           const auto item = trim(v.substr(0, comma));
           try {
             out.push_back(parse_terrain_family(item));
           } catch (const std::invalid_argument& e) {
             throw ConfigError(std::string(e.what()) + " for " + std::string(k));
           }
           if (comma == std::string_view::npos) break;
           v.remove_prefix(comma + 1);
         }
         if (out.empty()) throw ConfigError("empty family list for " + std::string(k));
         c.families = std::move(out);
       }},
      number("terrain", "difficulty", "level in [0, 19]", &RunConfig::difficulty),
      number("terrain", "resolution", "m per cell", &RunConfig::resolution),
      number("terrain", "length", "m along the direction of travel", &RunConfig::length),
      number("terrain", "width", "m", &RunConfig::width),
      number("terrain", "seed", "seed for rough relief", &RunConfig::terrain_seed),
      intrinsic("fx", "px", &CameraIntrinsics::fx),
      intrinsic("fy", "px", &CameraIntrinsics::fy),
      intrinsic("cx", "px", &CameraIntrinsics::cx),
      intrinsic("cy", "px", &CameraIntrinsics::cy),
      intrinsic("width", "px", &CameraIntrinsics::width),
      intrinsic("height", "px", &CameraIntrinsics::height),
      number("rig", "baseline", "m", &RunConfig::baseline),
      number("rig", "mount_height", "m above the torso origin", &RunConfig::mount_height),
      number("rig", "mount_pitch_deg", "downward pitch", &RunConfig::mount_pitch_deg),
      toggle("stereo_fusion", &StageToggles::stereo_fusion),
      toggle("random_conv", &StageToggles::random_conv),
      toggle("gaussian_noise", &StageToggles::gaussian_noise),
      toggle("perlin_noise", &StageToggles::perlin_noise),
      toggle("scale", &StageToggles::scale),
      toggle("pixel_failures", &StageToggles::pixel_failures),
      toggle("delay", &StageToggles::delay),
      number("walk", "torso_height", "m above ground", &RunConfig::torso_height),
      number("walk", "start_x", "m", &RunConfig::start_x),
      number("walk", "speed", "m/s", &RunConfig::walk_speed),
      number("walk", "dt", "s per frame", &RunConfig::frame_dt),
  };
  return table;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  for (const Field& f : fields()) {
    if (f.get(a) != f.get(b)) return false;
  }
  return true;
}

void set_config_value(RunConfig& config, std::string_view section, std::string_view key,
                      std::string_view value) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) {
      f.set(config, trim(value), std::string(section) + "." + std::string(key));
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(section) + "." + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    try {
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated section header");
        section = std::string(trim(s.substr(1, s.size() - 2)));
        bool known = false;
        for (const Field& f : fields()) known = known || section == f.section;
        if (!known) throw ConfigError("unknown section '" + section + "'");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected key = value");
      if (section.empty()) throw ConfigError("key outside of a [section]");
      set_config_value(base, section, trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    if (f.comment) out += std::string("# ") + f.comment + "\n";
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

void apply_env_overrides(RunConfig& config,
                         const std::function<const char*(const char*)>& getenv) {
  for (const Field& f : fields()) {
    const std::string name = "SDF_" + upper(f.section) + "_" + upper(f.key);
    const char* value = getenv ? getenv(name.c_str()) : std::getenv(name.c_str());
    if (!value) continue;
    try {
      f.set(config, trim(value), name);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment: ") + e.what());
    }
  }
}

void RunConfig::validate() const {
  if (envs < 1) throw ConfigError("run.envs must be >= 1");
  if (frames < 1) throw ConfigError("run.frames must be >= 1");
  if (workers < 0) throw ConfigError("run.workers must be >= 0");
  if (difficulty < 0 || difficulty >= kDifficultyLevels) {
    throw ConfigError("terrain.difficulty must be in [0, 19]");
  }
  if (!(resolution > 0.0)) throw ConfigError("terrain.resolution must be > 0");
  if (!(length > 0.0) || !(width > 0.0)) throw ConfigError("terrain extent must be > 0");
  if (!(baseline >= 0.0)) throw ConfigError("rig.baseline must be >= 0");
  if (!(frame_dt > 0.0)) throw ConfigError("walk.dt must be > 0");
  try {
    intrinsics.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rig: ") + e.what());
  }
}

std::vector<TerrainSpec> RunConfig::terrain_specs() const {
  std::vector<TerrainSpec> specs;
  for (TerrainFamily f : families) {
    TerrainSpec s;
    s.family = f;
    s.difficulty = difficulty;
    s.cell_resolution = resolution;
    s.length = length;
    s.width = width;
    s.seed = terrain_seed;
    specs.push_back(s);
  }
  return specs;
}

EngineConfig RunConfig::engine_config() const {
  validate();
  EngineConfig e;
  e.master_seed = seed;
  e.env_count = envs;
  e.terrains = terrain_specs();
  e.nominal_rig.left.intrinsics = intrinsics;
  e.nominal_rig.right.intrinsics = intrinsics;
  e.nominal_rig.baseline = baseline;
  e.nominal_rig.mount.position = Eigen::Vector3d(0.0, 0.0, mount_height);
  e.nominal_rig.mount.pitch_down = mount_pitch_deg * std::numbers::pi / 180.0;
  e.toggles = toggles;
  e.workers = workers;
  e.torso_height = torso_height;
  e.start_x = start_x;
  e.walk_speed = walk_speed;
  e.frame_dt = frame_dt;
  return e;
}

}  // namespace sdf
