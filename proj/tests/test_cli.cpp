#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "sdf/tensor_io.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int exit_code = -1;
  std::string output;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(SDF_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdf_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

TEST(Cli, GenIsDeterministic) {
  const fs::path a = fresh_dir("gen_a");
  const fs::path b = fresh_dir("gen_b");
  const std::string common = " --seed 5 --family stairs_up --family gap --family rough -o ";
  ASSERT_EQ(run_cli("gen" + common + a.string()).exit_code, 0);
  ASSERT_EQ(run_cli("gen" + common + b.string()).exit_code, 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().filename() == "config.ini") continue;  // records the output path
    const fs::path other = b / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 6);  // 3 x (hfld + pgm)
  EXPECT_TRUE(fs::exists(a / "terrain_01_gap.hfld"));
}

TEST(Cli, ZeroEnvsIsUsageError) {
  const Result r = run_cli("augment --envs 0 -o " + fresh_dir("zero").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("--envs"), std::string::npos);
  EXPECT_EQ(run_cli("augment --no-such-flag").exit_code, 2);
}

TEST(Cli, MissingHeightfieldIsRuntimeError) {
  const Result r = run_cli("augment --heightfield /nonexistent/field.hfld -o " + fresh_dir("missing").string());
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, NoNoiseStudentEqualsClean) {
  const fs::path dir = fresh_dir("identity");
  const Result r = run_cli("augment --seed 3 --envs 3 --frames 4 --no-noise --no-failures --baseline 0 -o " +
                           dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const sdf::Tensor4 student = sdf::read_npy(dir / "student.npy");
  const sdf::Tensor4 clean = sdf::read_npy(dir / "clean.npy");
  const std::array<std::size_t, 4> shape{12, 1, 24, 32};
  EXPECT_EQ(student.shape, shape);
  EXPECT_EQ(student.data, clean.data);
}

TEST(Cli, AugmentWritesTensorsAndStagePanels) {
  const fs::path dir = fresh_dir("stages");
  const Result r = run_cli("augment --seed 4 --envs 2 --frames 3 --dump-stages -o " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const sdf::Tensor4 student = sdf::read_npy(dir / "student.npy");
  EXPECT_EQ(student.shape[0], 6u);
  for (float v : student.data) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  int ppm = 0;
  for (const auto& entry : fs::directory_iterator(dir / "stages")) ppm += entry.path().extension() == ".ppm";
  EXPECT_EQ(ppm, 3 * 10);
  EXPECT_TRUE(fs::exists(dir / "config.ini"));
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path dir = fresh_dir("precedence");
  {
    std::ofstream f(dir / "in.ini");
    f << "[run]\nenvs = 2\nframes = 2\n";
  }
  const Result r = run_cli("augment --config " + (dir / "in.ini").string() + " --frames 1 -o " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(sdf::read_npy(dir / "student.npy").shape[0], 2u);
  const std::string written = slurp(dir / "config.ini");
  EXPECT_NE(written.find("envs = 2"), std::string::npos);
  EXPECT_NE(written.find("frames = 1"), std::string::npos);
}

TEST(Cli, RenderWritesDepthPairs) {
  const fs::path dir = fresh_dir("render");
  ASSERT_EQ(run_cli("render --envs 1 --frames 2 -o " + dir.string()).exit_code, 0);
  EXPECT_TRUE(fs::exists(dir / "env0000_f0001_left.pfm"));
  EXPECT_TRUE(fs::exists(dir / "env0000_f0001_right.ppm"));
}

TEST(Cli, BenchPrintsJsonLines) {
  const Result r = run_cli("bench --envs 2 --frames 2 --trials 2 -o " + fresh_dir("bench").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("\"env_frames_per_s\""), std::string::npos);
  EXPECT_NE(r.output.find("\"trial\":1"), std::string::npos);
}

}  // namespace
