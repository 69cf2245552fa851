// sdf: terrain generation, stereo rendering, depth augmentation and
// throughput benchmarking from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdf/colormap.hpp"
#include "sdf/config.hpp"
#include "sdf/depth_image.hpp"
#include "sdf/engine.hpp"
#include "sdf/tensor_io.hpp"
#include "sdf/terrain.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> envs;
  std::optional<int> frames;
  std::optional<int> workers;
  std::optional<std::string> output;
  std::optional<double> baseline;
  std::optional<int> difficulty;
  std::vector<std::string> families;
  std::vector<std::string> heightfields;
  bool dump_stages = false;
  int dump_env = 0;
  int trials = 3;
  bool no_fusion = false;
  bool no_conv = false;
  bool no_gauss = false;
  bool no_perlin = false;
  bool no_scale = false;
  bool no_failures = false;
  bool no_delay = false;
  bool no_noise = false;
};

sdf::RunConfig resolve_config(const Options& o) {
  sdf::RunConfig c;
  if (!o.config_path.empty()) c = sdf::load_config(o.config_path);
  sdf::apply_env_overrides(c);
  if (o.seed) c.seed = *o.seed;
  if (o.envs) c.envs = *o.envs;
  if (o.frames) c.frames = *o.frames;
  if (o.workers) c.workers = *o.workers;
  if (o.output) c.output = *o.output;
  if (o.baseline) c.baseline = *o.baseline;
  if (o.difficulty) c.difficulty = *o.difficulty;
  if (!o.families.empty()) {
    c.families.clear();
    for (const std::string& f : o.families) {
      try {
        c.families.push_back(sdf::parse_terrain_family(f));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (o.no_fusion) c.toggles.stereo_fusion = false;
  if (o.no_conv) c.toggles.random_conv = false;
  if (o.no_gauss) c.toggles.gaussian_noise = false;
  if (o.no_perlin) c.toggles.perlin_noise = false;
  if (o.no_scale) c.toggles.scale = false;
  if (o.no_failures) c.toggles.pixel_failures = false;
  if (o.no_delay) c.toggles.delay = false;
  if (o.no_noise) {
    c.toggles.random_conv = false;
    c.toggles.gaussian_noise = false;
    c.toggles.perlin_noise = false;
    c.toggles.scale = false;
    c.toggles.delay = false;
  }
  if (c.envs < 1) throw UsageError("--envs must be at least 1");
  if (c.frames < 1) throw UsageError("--frames must be at least 1");
  try {
    c.validate();
  } catch (const sdf::ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

fs::path prepare_output(const sdf::RunConfig& c) {
  const fs::path dir = c.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  std::ofstream cfg(dir / "config.ini");
  cfg << sdf::serialize_config(c);
  if (!cfg) throw std::runtime_error("cannot write " + (dir / "config.ini").string());
  return dir;
}

std::string padded(std::uint64_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

sdf::EngineConfig engine_config(const sdf::RunConfig& c, const Options& o) {
  sdf::EngineConfig e = c.engine_config();
  if (!o.heightfields.empty()) {
    e.heightfields.clear();
    e.terrains.resize(o.heightfields.size(), e.terrains.front());
    for (const std::string& path : o.heightfields) {
      if (!fs::exists(path)) throw std::runtime_error("missing heightfield: " + path);
      e.heightfields.push_back(sdf::read_hfld(path));
    }
  }
  return e;
}

int cmd_gen(const Options& o) {
  const sdf::RunConfig c = resolve_config(o);
  const fs::path dir = prepare_output(c);
  const auto specs = c.terrain_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const sdf::Heightfield field = sdf::make_terrain(specs[i]);
    const std::string stem = "terrain_" + padded(i, 2) + "_" + std::string(sdf::to_string(specs[i].family));
    const fs::path hfld = dir / (stem + ".hfld");
    sdf::write_hfld(hfld, field);
    sdf::write_pgm16(dir / (stem + ".pgm"), field);
    const sdf::Heightfield reloaded = sdf::read_hfld(hfld);
    if (reloaded.rows() != field.rows() || reloaded.cols() != field.cols() ||
        !std::equal(reloaded.heights().begin(), reloaded.heights().end(), field.heights().begin())) {
      throw std::runtime_error("reload mismatch for " + hfld.string());
    }
    double sum = 0.0;
    for (float h : field.heights()) sum += h;
    std::cout << hfld.string() << ": " << field.rows() << "x" << field.cols() << " cells @ "
              << field.resolution() << " m, height min " << field.min_height() << " max "
              << field.max_height() << " mean " << sum / field.heights().size() << " m, feature "
              << sdf::characteristic_dimension(specs[i].family, specs[i].difficulty) << " m\n";
  }
  return 0;
}

int cmd_render(const Options& o) {
  const sdf::RunConfig c = resolve_config(o);
  const fs::path dir = prepare_output(c);
  sdf::BatchEngine engine(engine_config(c, o));
  for (int f = 0; f < c.frames; ++f) {
    std::vector<sdf::StereoPair> pairs(engine.env_count());
    sdf::parallel_for(pairs.size(), c.workers, [&](std::size_t i) {
      const sdf::Pose pose = engine.scripted_pose(i, static_cast<std::uint64_t>(f));
      pairs[i] = sdf::render_stereo(engine.terrain(i), pose, engine.env(i).rig(),
                                    engine.config().render);
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string stem = "env" + padded(i, 4) + "_f" + padded(static_cast<std::uint64_t>(f), 4);
      sdf::write_pfm(dir / (stem + "_left.pfm"), pairs[i].left);
      sdf::write_pfm(dir / (stem + "_right.pfm"), pairs[i].right);
      sdf::write_ppm(dir / (stem + "_left.ppm"), pairs[i].left);
      sdf::write_ppm(dir / (stem + "_right.ppm"), pairs[i].right);
    }
  }
  std::cout << "rendered " << c.envs << " envs x " << c.frames << " frames into " << dir.string()
            << "\n";
  return 0;
}

void dump_trace(const fs::path& dir, int frame, const sdf::StageTrace& t) {
  struct Panel {
    const char* name;
    const sdf::DepthImage* img;
    float max_value;
  };
  const Panel panels[] = {
      {"00_left", &t.left, 2.0f},        {"01_right", &t.right, 2.0f},
      {"02_fused", &t.fused, 2.0f},      {"03_conv", &t.conv, 2.0f},
      {"04_gauss", &t.gauss, 2.0f},      {"05_perlin", &t.perlin, 2.0f},
      {"06_scaled", &t.scaled, 2.0f},    {"07_dead", &t.dead, 2.0f},
      {"08_saturated", &t.saturated, 2.0f}, {"09_clipped", &t.clipped_cropped, 1.0f},
  };
  for (const Panel& p : panels) {
    const std::string stem = "f" + padded(static_cast<std::uint64_t>(frame), 4) + "_" + p.name;
    sdf::write_pgm8(dir / (stem + ".pgm"), *p.img, p.max_value);
    sdf::write_ppm(dir / (stem + ".ppm"), *p.img, p.max_value);
  }
}

void check_tensor(const sdf::Tensor4& t, const fs::path& path) {
  const sdf::Tensor4 back = sdf::read_npy(path);
  if (back.shape != t.shape || back.data != t.data) {
    throw std::runtime_error("verification failed for " + path.string());
  }
  for (float v : t.data) {
    if (!(v >= 0.0f && v <= 1.0f)) throw std::runtime_error("value outside [0, 1] in " + path.string());
  }
}

int cmd_augment(const Options& o) {
  const sdf::RunConfig c = resolve_config(o);
  if (o.dump_env < 0 || o.dump_env >= c.envs) throw UsageError("--dump-env out of range");
  const fs::path dir = prepare_output(c);
  const fs::path stage_dir = dir / "stages";
  if (o.dump_stages) fs::create_directories(stage_dir);

  sdf::BatchEngine engine(engine_config(c, o));
  const std::size_t n = engine.env_count();
  const auto frames = static_cast<std::size_t>(c.frames);
  sdf::Tensor4 student(frames * n, 1, sdf::kObsHeight, sdf::kObsWidth);
  sdf::Tensor4 clean(frames * n, 1, sdf::kObsHeight, sdf::kObsWidth);
  sdf::StageTrace trace;
  for (std::size_t f = 0; f < frames; ++f) {
    engine.trace_env(static_cast<std::size_t>(o.dump_env), o.dump_stages ? &trace : nullptr);
    const sdf::BatchOutput out = engine.step();
    std::copy(out.student.data.begin(), out.student.data.end(),
              student.data.begin() + static_cast<std::ptrdiff_t>(f * out.student.data.size()));
    std::copy(out.clean.data.begin(), out.clean.data.end(),
              clean.data.begin() + static_cast<std::ptrdiff_t>(f * out.clean.data.size()));
    if (o.dump_stages) dump_trace(stage_dir, static_cast<int>(f), trace);
  }
  sdf::write_npy(dir / "student.npy", student);
  sdf::write_npy(dir / "clean.npy", clean);
  check_tensor(student, dir / "student.npy");
  check_tensor(clean, dir / "clean.npy");
  std::cout << "wrote " << (dir / "student.npy").string() << " and "
            << (dir / "clean.npy").string() << " (" << frames << " frames x " << n
            << " envs, 1x24x32 each)\n";
  return 0;
}

int cmd_bench(const Options& o) {
  const sdf::RunConfig c = resolve_config(o);
  if (o.trials < 1) throw UsageError("--trials must be at least 1");
  sdf::BatchEngine engine(engine_config(c, o));
  engine.set_timing(true);
  constexpr double kTargetHz = 50.0;
  constexpr double kTargetEnvs = 1024.0;
  for (int trial = 0; trial < o.trials; ++trial) {
    engine.reset_times();
    const auto t0 = std::chrono::steady_clock::now();
    for (int f = 0; f < c.frames; ++f) engine.step();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const sdf::EngineTimes& t = engine.times();
    const double env_frames = static_cast<double>(c.envs) * c.frames;
    const double rate = env_frames / wall;

    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (int s = 0; s < sdf::kNumStages; ++s) {
      stages[std::string(sdf::to_string(static_cast<sdf::Stage>(s)))] = t.stages.seconds[s];
    }
    nlohmann::ordered_json rec;
    rec["trial"] = trial;
    rec["envs"] = c.envs;
    rec["frames"] = c.frames;
    rec["workers"] = c.workers;
    rec["wall_s"] = wall;
    rec["env_frames_per_s"] = rate;
    rec["render_s"] = t.render;
    rec["stages_s"] = stages;
    rec["stage_sum_s"] = t.render + t.stages.total();
    rec["env_total_s"] = t.env_total;
    rec["frame_hz_at_envs"] = rate / c.envs;
    rec["meets_50hz_at_envs"] = rate / c.envs >= kTargetHz;
    rec["target_env_frames_per_s"] = kTargetEnvs * kTargetHz;
    rec["meets_1024x50hz"] = rate >= kTargetEnvs * kTargetHz;
    std::cout << rec.dump() << std::endl;
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool pipeline) {
  cmd->add_option("--config", o.config_path, "config file (key = value, [sections])")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--envs", o.envs, "number of environments");
  cmd->add_option("--output,-o", o.output, "output directory");
  cmd->add_option("--difficulty", o.difficulty, "terrain difficulty level 0..19");
  cmd->add_option("--family", o.families, "terrain family (repeatable)");
  if (!pipeline) return;
  cmd->add_option("--frames", o.frames, "frames per environment");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  cmd->add_option("--baseline", o.baseline, "stereo baseline in m");
  cmd->add_option("--heightfield", o.heightfields, "HFLD file to use instead of generating");
  cmd->add_flag("--no-fusion", o.no_fusion, "disable stereo fusion");
  cmd->add_flag("--no-conv", o.no_conv, "disable random convolution");
  cmd->add_flag("--no-gauss", o.no_gauss, "disable Gaussian noise");
  cmd->add_flag("--no-perlin", o.no_perlin, "disable Perlin noise");
  cmd->add_flag("--no-scale", o.no_scale, "disable depth scaling");
  cmd->add_flag("--no-failures", o.no_failures, "disable dead and saturated pixels");
  cmd->add_flag("--no-delay", o.no_delay, "disable the delay buffer");
  cmd->add_flag("--no-noise", o.no_noise,
                "disable convolution, Gaussian, Perlin, scaling and delay");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic depth sensing: terrains, stereo renders and sensor augmentation"};
  app.require_subcommand(1);
  Options o;
  auto* gen = app.add_subcommand("gen", "generate heightfields (HFLD + 16-bit PGM)");
  auto* render = app.add_subcommand("render", "render clean stereo pairs (PFM + PPM)");
  auto* augment = app.add_subcommand("augment", "render and augment; write student/clean tensors");
  auto* bench = app.add_subcommand("bench", "measure full-pipeline throughput (JSON lines)");
  add_common(gen, o, false);
  add_common(render, o, true);
  add_common(augment, o, true);
  add_common(bench, o, true);
  augment->add_flag("--dump-stages", o.dump_stages, "write one PGM and PPM per stage per frame");
  augment->add_option("--dump-env", o.dump_env, "environment whose stages are dumped");
  bench->add_option("--trials", o.trials, "number of timed trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*render) return cmd_render(o);
    if (*augment) return cmd_augment(o);
    if (*bench) return cmd_bench(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sdf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
