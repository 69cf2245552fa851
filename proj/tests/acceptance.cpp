// Acceptance run: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when a hard criterion fails. The throughput line is reported but
// never fails the run.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "sdf/augment.hpp"
#include "sdf/camera.hpp"
#include "sdf/engine.hpp"
#include "sdf/tensor_io.hpp"
#include "sdf/terrain.hpp"
#include "sdf/training_math.hpp"

namespace {

using namespace sdf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kDeterminismSeed = 20240917;
constexpr int kDeterminismEnvs = 64;
constexpr int kDeterminismFrames = 100;

struct Report {
  int hard_failures = 0;

  void line(const std::string& name, bool pass, const std::string& detail, bool fatal = true) {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "  " << detail;
    if (!pass && !fatal) std::cout << "  [flagged regression, non-fatal]";
    std::cout << std::endl;
    if (!pass && fatal) ++hard_failures;
  }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

EngineConfig determinism_config(int workers) {
  EngineConfig c;
  c.master_seed = kDeterminismSeed;
  c.env_count = kDeterminismEnvs;
  c.workers = workers;
  c.terrains.clear();
  for (TerrainFamily f : kAllTerrainFamilies) {
    TerrainSpec s;
    s.family = f;
    s.difficulty = 12;
    s.seed = 3;
    c.terrains.push_back(s);
  }
  return c;
}

// Runs the determinism workload and writes every frame of both branches.
void write_determinism_run(int workers, const fs::path& path) {
  BatchEngine engine(determinism_config(workers));
  const std::size_t per_frame = static_cast<std::size_t>(kDeterminismEnvs) * kObsHeight * kObsWidth;
  Tensor4 all(2 * static_cast<std::size_t>(kDeterminismFrames) * kDeterminismEnvs, 1, kObsHeight, kObsWidth);
  for (int f = 0; f < kDeterminismFrames; ++f) {
    const BatchOutput out = engine.step();
    std::copy(out.student.data.begin(), out.student.data.end(), all.data.begin() + 2 * f * per_frame);
    std::copy(out.clean.data.begin(), out.clean.data.end(), all.data.begin() + (2 * f + 1) * per_frame);
  }
  write_npy(path, all);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

bool run_child(const std::string& self, int workers, const fs::path& out) {
  const std::string cmd = self + " --determinism-child " + std::to_string(workers) + " " + out.string();
  const int status = std::system(cmd.c_str());
  return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

void check_determinism(Report& r, const std::string& self) {
  const fs::path dir = fs::temp_directory_path() / "sdf_acceptance";
  fs::create_directories(dir);
  const std::vector<int> workers{1, 1, 2, 4};
  std::vector<std::string> runs;
  bool children_ok = true;
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const fs::path p = dir / ("run" + std::to_string(i) + ".npy");
    fs::remove(p);
    children_ok = run_child(self, workers[i], p) && children_ok;
    runs.push_back(slurp(p));
  }
  bool same_process_pair = children_ok && !runs[0].empty() && runs[0] == runs[1];
  bool same_workers = children_ok && runs[0] == runs[2] && runs[0] == runs[3];
  r.line("determinism: two processes, same seed",
         same_process_pair,
         std::to_string(kDeterminismFrames) + " frames x " + std::to_string(kDeterminismEnvs) +
             " envs, " + std::to_string(runs[0].size()) + " bytes, bit-identical=" +
             (same_process_pair ? "yes" : "no"));
  r.line("determinism: worker counts 1/2/4", same_workers,
         std::string("bit-identical=") + (same_workers ? "yes" : "no"));
}

// ---------------------------------------------------------------------------

std::vector<StereoPair> rendered_pool() {
  std::vector<StereoPair> pool;
  const DrawSequence draws = RngStream(11, 0).at(DrawPurpose::kUser);
  std::uint64_t k = 0;
  for (TerrainFamily fam : kAllTerrainFamilies) {
    TerrainSpec spec;
    spec.family = fam;
    spec.difficulty = 19;
    spec.seed = 1;
    const Heightfield field = make_terrain(spec);
    for (int i = 0; i < 6; ++i) {
      StereoRig rig = sample_rig(StereoRig{}, RngStream(5, k));
      Pose torso;
      const double x = draws.uniform(k++, 1.0, 4.5);
      torso.position = {x, draws.uniform(k++, -0.5, 0.5), field.height_at(x, 0.0) + 0.75};
      pool.push_back(render_stereo(field, torso, rig));
    }
  }
  return pool;
}

DepthImage synthetic_depth(const DrawSequence& d, std::uint64_t base) {
  DepthImage img(30, 40);
  const double level = d.uniform(base, 0.05, 5.0);
  const double hole_rate = d.uniform(base + 1, 0.0, 0.5);
  for (int v = 0; v < 30; ++v) {
    for (int u = 0; u < 40; ++u) {
      const std::uint64_t i = base + 2 + static_cast<std::uint64_t>(v * 40 + u) * 2;
      img.at(v, u) = d.uniform(i) < hole_rate ? 0.0f : static_cast<float>(level * d.uniform(i + 1, 0.2, 1.5));
    }
  }
  return img;
}

void check_shape_range(Report& r) {
  const auto t0 = Clock::now();
  const std::vector<StereoPair> pool = rendered_pool();
  const DrawSequence d = RngStream(12, 0).at(DrawPurpose::kUser);
  const int envs = 100;
  const int frames = 100;
  long violations = 0;
  long total = 0;
  for (int e = 0; e < envs; ++e) {
    const std::uint64_t seed = d.bits(static_cast<std::uint64_t>(e));
    EnvState env(seed, static_cast<std::uint64_t>(e), sample_rig(StereoRig{}, RngStream(seed, 1)));
    for (int f = 0; f < frames; ++f) {
      FrameOutput out;
      const std::uint64_t tag = static_cast<std::uint64_t>(e * frames + f);
      if (tag % 4 == 3) {
        const std::uint64_t base = 100000 + tag * 3000;
        out = augment_frame(env, synthetic_depth(d, base), synthetic_depth(d, base + 2500));
      } else {
        const StereoPair& p = pool[tag % pool.size()];
        out = augment_frame(env, p.left, p.right);
      }
      ++total;
      bool ok = out.student.height() == 24 && out.student.width() == 32 && out.clean.height() == 24 &&
                out.clean.width() == 32;
      for (float v : out.student.data()) ok = ok && v >= 0.0f && v <= 1.0f;
      for (float v : out.clean.data()) ok = ok && v >= 0.0f && v <= 1.0f;
      violations += ok ? 0 : 1;
    }
  }
  const double secs = seconds_since(t0);
  r.line("pipeline shape and range", violations == 0 && total == 10000 && secs < 60.0,
         std::to_string(total) + " frames, " + std::to_string(violations) + " violations, " +
             fmt(secs, 3) + " s (limit 60 s)");
}

void check_fusion(Report& r) {
  bool exact = true;
  int scenes = 0;
  for (double baseline : {0.05, 0.1, 0.2}) {
    for (double d_near : {0.25, 0.5}) {
      oracle::StepEdgeScene s;
      s.baseline = baseline;
      s.d_near = d_near;
      const std::vector<bool> vis = s.visible_row();
      for (double tau : {0.05, 0.1, 0.15, 0.2}) {
        const DepthImage fused = stereo_fuse(s.left(), s.right(), s.fx, s.baseline, tau);
        for (int v = 0; v < s.height; ++v) {
          for (int u = 0; u < s.width; ++u) {
            exact = exact && DepthImage::valid(fused.at(v, u)) == vis[static_cast<std::size_t>(u)];
          }
        }
      }
      ++scenes;
    }
  }
  r.line("stereo fusion: brute-force reprojection oracle", exact,
         std::to_string(scenes) + " step-edge scenes x 4 tau, invalid sets identical=" + (exact ? "yes" : "no"));

  bool monotone = true;
  int scenes_checked = 0;
  int scenes_tau_sensitive = 0;
  std::string fractions;
  for (TerrainFamily fam : {TerrainFamily::kStairsUp, TerrainFamily::kStairsDown}) {
    TerrainSpec spec;
    spec.family = fam;
    spec.difficulty = 19;
    const Heightfield field = make_terrain(spec);
    for (double baseline : {0.05, 0.08, 0.12}) {
      StereoRig rig;
      rig.baseline = baseline;
      for (double x : {2.8, 3.0, 3.2, 3.4, 3.6, 3.8}) {
        Pose torso;
        torso.position = {x, 0.0, field.height_at(x, 0.0) + 0.75};
        const StereoPair pair = render_stereo(field, torso, rig);
        std::vector<double> holes;
        for (double tau : {0.05, 0.10, 0.15, 0.20}) {
          const DepthImage f = stereo_fuse(pair.left, pair.right, rig.left.intrinsics.fx, rig.baseline, tau);
          holes.push_back(static_cast<double>(f.count_invalid()) / (30.0 * 40.0));
        }
        monotone = monotone && std::is_sorted(holes.rbegin(), holes.rend());
        scenes_tau_sensitive += holes.front() > holes.back();
        ++scenes_checked;
        if (fam == TerrainFamily::kStairsDown && baseline == 0.12 && x == 3.2) {
          for (double h : holes) fractions += fmt(h, 4) + " ";
        }
      }
    }
  }
  r.line("stereo fusion: holes non-increasing in tau", monotone,
         std::to_string(scenes_checked) + " stair scenes (" + std::to_string(scenes_tau_sensitive) +
             " tau-sensitive); stairs-down example at tau 0.05..0.20: " + fractions);
}

void check_noise(Report& r) {
  const DepthPolynomial c{0.01, -0.02, 0.025};
  bool ok = true;
  std::string detail;
  std::uint64_t frame = 0;
  for (double d : {0.5, 1.0, 1.2, 1.5, 1.9}) {
    const DepthImage img(100, 1000, static_cast<float>(d));
    const DepthImage out = gaussian_noise(img, c, RngStream(13, 0).at(DrawPurpose::kGaussNoise, frame++));
    std::vector<double> res(out.data().size());
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = static_cast<double>(out.data()[i]) - d;
    const double expected = std::abs(c[0] + c[1] * d + c[2] * d * d);
    const double rel = std::abs(oracle::stddev(res) - expected) / expected;
    ok = ok && rel <= 0.05;
    detail += "d=" + fmt(d, 2) + ":" + fmt(rel * 100.0, 3) + "% ";
  }
  r.line("gaussian noise std vs polynomial", ok, "n=1e5 per depth, relative error " + detail + "(limit 5%)");
}

void check_perlin(Report& r) {
  double worst = 0.0;
  double worst_step = 0.0;
  bool c0 = true;
  for (std::uint64_t f = 0; f < 1000; ++f) {
    const PerlinField full(30, 40, RngStream(14, f).at(DrawPurpose::kPerlinLattice, f));
    for (float n : full.values()) worst = std::max(worst, static_cast<double>(std::abs(n)));
    const PerlinField obs(24, 32, RngStream(15, f).at(DrawPurpose::kPerlinLattice, f));
    for (float n : obs.values()) worst = std::max(worst, static_cast<double>(std::abs(n)));
    worst_step = std::max(worst_step, oracle::max_adjacent_difference(
                                          std::vector<float>(obs.values().begin(), obs.values().end()), 24, 32));
    if (f % 50 == 0) {
      for (double x = 0.0; x < 31.0; x += 0.37) {
        c0 = c0 && std::abs(obs.sample(x + 1e-7, 11.3) - obs.sample(x, 11.3)) < 1e-4;
      }
    }
  }
  r.line("perlin bound", worst <= PerlinField::kAmplitudeBound,
         "1000 fields, max |n| = " + fmt(worst) + " (bound 1.9375)");
  r.line("perlin continuity", worst_step < 0.8 && c0,
         "max adjacent-pixel difference " + fmt(worst_step) + " (bound 0.8), C0 probe " + (c0 ? "ok" : "broken"));
}

void check_kl(Report& r) {
  const DrawSequence d = RngStream(16, 0).at(DrawPurpose::kUser);
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const int dims = 1 + static_cast<int>(t % 4);
    RowMatrixXf z(2, dims);
    double oracle_kl = 0.0;
    for (int j = 0; j < dims; ++j) {
      const std::uint64_t k = t * 8 + static_cast<std::uint64_t>(j) * 2;
      const double mu = std::round(d.uniform(k, -2.0, 2.0) * 64.0) / 64.0;
      const double sd = std::round(d.uniform(k + 1, 0.1, 3.0) * 64.0) / 64.0;
      z(0, j) = static_cast<float>(mu - sd);
      z(1, j) = static_cast<float>(mu + sd);
      oracle_kl += oracle::gaussian_kl_numeric(mu, sd * sd);
    }
    worst = std::max(worst, std::abs(kl_loss(LatentBatch(z), 0.0) - oracle_kl));
  }
  RowMatrixXf unit(2, 1);
  unit << 0.0f, 2.0f;
  const double half = kl_loss(LatentBatch(unit), 0.0);
  r.line("kl oracle", worst <= 1e-6 && std::abs(half - 0.5) <= 1e-12,
         "500 configurations, max |kl - numeric| = " + fmt(worst, 3) + " (limit 1e-6); mu=1 var=1 D=1 -> " +
             fmt(half, 12));
}

void check_losses(Report& r) {
  RowMatrixXf a(4, 3);
  a << 1, 2, 3, -1, 0.5f, 2, 0, 0, 1, 4, -2, 0.25f;
  const bool zero = behavior_loss(a, a) == 0.0 && denoise_loss(LatentBatch(a), LatentBatch(a)) == 0.0;
  const bool weights = total_loss(1.0, 1.0, 1.0) == 1.0 + 0.1 + 0.1 && total_loss(0.0, 1.0, 0.0) == 0.1 &&
                       total_loss(0.0, 0.0, 1.0) == 0.1;
  r.line("loss identities", zero && weights,
         "identical inputs -> 0: " + std::string(zero ? "yes" : "no") + "; total(1,1,1) = " +
             fmt(total_loss(1.0, 1.0, 1.0), 17) + ", lambda = 0.1 exact: " + (weights ? "yes" : "no"));
}

void check_rewards(Report& r) {
  const Eigen::Vector2d cmd(0.6, 0.8);
  const double exp_err = std::abs(reward_vel_exp(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 0.5), 0.5) - std::exp(-1.0));
  const bool cap = reward_vel_dir(cmd, 2.0 * cmd, 1e-3) == reward_vel_dir(cmd, cmd, 1e-3);
  const double contact = reward_contact({{-0.1, 0.1}}, {true}, 0.2);
  using R = RewardId;
  const bool table = applicable_rewards(TerrainCategory::kStairsPlatforms) == std::vector<R>{R::kVelExp, R::kContact} &&
                     applicable_rewards(TerrainCategory::kGapCrossing) == std::vector<R>{R::kVelDir} &&
                     applicable_rewards(TerrainCategory::kRough) == std::vector<R>{R::kVelExp};
  r.line("rewards", exp_err <= 1e-12 && cap && std::abs(contact - 0.1) <= 1e-15 && table,
         "|vel_exp - e^-1| = " + fmt(exp_err, 3) + ", 2x overspeed capped: " + (cap ? "yes" : "no") +
             ", contact two-point = " + fmt(contact, 17) + ", applicability table: " + (table ? "match" : "mismatch"));
}

void check_metrics(Report& r) {
  PowerTrace t;
  t.torques = Eigen::MatrixXd(1, 2);
  t.velocities = Eigen::MatrixXd(1, 2);
  t.torques << 3.0, 0.0;
  t.velocities << 1.0, 4.0;
  const float p = static_cast<float>(avg_power(t));
  const double ratio = pdr(32.4, 27.7);
  r.line("metrics", p == 3.0f && pdr(27.7, 27.7) == 0.0 && std::abs(ratio - 16.97) < 0.005,
         "avg_power single step = " + fmt(p) + " W, pdr(32.4, 27.7) = " + fmt(ratio, 6) + " %");
}

void check_height_scan(Report& r) {
  const int rows = 81;
  const int cols = 161;
  const Heightfield flat(rows, cols, 0.05, 0.0, -2.0, std::vector<float>(static_cast<std::size_t>(rows) * cols, 0.3f));
  const HeightScan s = height_scan(flat, {4.0, 0.2, 0.7, 1.1});
  double mean = 0.0;
  for (float v : s.values) mean += v;
  mean /= HeightScan::kSamples;
  double var = 0.0;
  for (float v : s.values) var += (v - mean) * (v - mean);

  std::vector<float> h(static_cast<std::size_t>(rows) * cols, 0.0f);
  for (int row = 0; row < rows; ++row) {
    for (int c = 0; c < cols; ++c) {
      if (c * 0.05 >= 3.0 + 0.4 + 0.025) h[static_cast<std::size_t>(row) * cols + c] = 0.40f;
    }
  }
  const HeightScan slab = height_scan(Heightfield(rows, cols, 0.05, 0.0, -2.0, h), {3.0, 0.0, 0.0, 0.0});
  bool exact = true;
  for (int i = 0; i < HeightScan::kForwardSamples; ++i) {
    for (int j = 0; j < HeightScan::kLateralSamples; ++j) {
      const float expected = HeightScan::forward_offset(i) > 0.425 ? 0.40f : 0.0f;
      exact = exact && slab.at(i, j) == expected;
    }
  }
  r.line("height scan", s.values.size() == 693 && var == 0.0 && exact,
         std::to_string(s.values.size()) + " samples, constant-field variance " + fmt(var) +
             ", slab offsets exactly 0.40: " + (exact ? "yes" : "no"));
}

void check_throughput(Report& r) {
  EngineConfig c = determinism_config(0);
  c.env_count = 64;
  BatchEngine engine(c);
  engine.step();  // warm-up
  const int frames = 20;
  const auto t0 = Clock::now();
  for (int f = 0; f < frames; ++f) engine.step();
  const double secs = seconds_since(t0);
  const double rate = c.env_count * frames / secs;
  const double target = 1024.0 * 50.0;
  r.line("throughput", rate >= target,
         fmt(rate, 5) + " env-frames/s with 64 envs on " + std::to_string(std::max(1u, std::thread::hardware_concurrency())) +
             " hardware threads (target 51200 = 1024 envs x 50 Hz)",
         false);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 4 && std::string(argv[1]) == "--determinism-child") {
    try {
      write_determinism_run(std::atoi(argv[2]), argv[3]);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
  }

  Report r;
  try {
    check_shape_range(r);
    check_fusion(r);
    check_noise(r);
    check_perlin(r);
    check_kl(r);
    check_losses(r);
    check_rewards(r);
    check_metrics(r);
    check_determinism(r, fs::absolute(argv[0]).string());
    check_throughput(r);
    check_height_scan(r);
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance run aborted  " << e.what() << std::endl;
    return 1;
  }
  std::cout << (r.hard_failures == 0 ? "all hard criteria passed" : std::to_string(r.hard_failures) + " hard criteria failed")
            << std::endl;
  return r.hard_failures == 0 ? 0 : 1;
}
