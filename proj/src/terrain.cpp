#include "sdf/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "sdf/rng.hpp"

namespace sdf {

namespace {

constexpr double kFinalRiser = 0.15;
constexpr double kTread = 0.30;
constexpr double kFinalGapWidth = 0.45;
constexpr double kGapDepth = 1.0;
constexpr double kFinalSlabHeight = 0.40;
constexpr double kPlatformFoothold = 0.30;

// Linear from 10% of the final value at level 0 to the final value at level 19.
double level_scale(int difficulty) {
  return 0.1 + 0.9 * static_cast<double>(difficulty) / (kDifficultyLevels - 1);
}

void check_difficulty(int difficulty) {
  if (difficulty < 0 || difficulty >= kDifficultyLevels) {
    throw std::invalid_argument("difficulty must be in [0, 19], got " +
                                std::to_string(difficulty));
  }
}

// Number of whole treads between x0 and x, tolerant to rounding of node
// coordinates that sit exactly on a riser.
int steps_since(double x, double x0, double tread) {
  return static_cast<int>(std::floor((x - x0) / tread + 1e-9));
}

std::vector<float> rough_relief(const TerrainSpec& spec, int rows, int cols, double amplitude) {
  const DrawSequence draws =
      RngStream(spec.seed, 0).at(DrawPurpose::kTerrain, static_cast<std::uint64_t>(spec.family));
  std::vector<double> raw(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = draws.uniform(i, -amplitude, amplitude);

  // One 3x3 box pass with edge replication keeps |h| <= amplitude.
  std::vector<float> out(raw.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = std::clamp(r + dr, 0, rows - 1);
          const int cc = std::clamp(c + dc, 0, cols - 1);
          sum += raw[static_cast<std::size_t>(rr) * cols + cc];
        }
      }
      out[static_cast<std::size_t>(r) * cols + c] = static_cast<float>(sum / 9.0);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(TerrainFamily family) {
  switch (family) {
    case TerrainFamily::kStairsUp: return "stairs_up";
    case TerrainFamily::kStairsDown: return "stairs_down";
    case TerrainFamily::kPlatformUp: return "platform_up";
    case TerrainFamily::kPlatformDown: return "platform_down";
    case TerrainFamily::kGap: return "gap";
    case TerrainFamily::kRough: return "rough";
  }
  return "unknown";
}

TerrainFamily parse_terrain_family(std::string_view name) {
  for (TerrainFamily f : kAllTerrainFamilies) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown terrain family: " + std::string(name));
}

TerrainCategory terrain_category(TerrainFamily family) {
  switch (family) {
    case TerrainFamily::kStairsUp:
    case TerrainFamily::kStairsDown:
    case TerrainFamily::kPlatformUp:
    case TerrainFamily::kPlatformDown:
      return TerrainCategory::kStairsPlatforms;
    case TerrainFamily::kGap:
      return TerrainCategory::kGapCrossing;
    case TerrainFamily::kRough:
      return TerrainCategory::kRough;
  }
  throw std::invalid_argument("unknown terrain family");
}

FeatureDimensions feature_dimensions(int difficulty) {
  check_difficulty(difficulty);
  const double s = level_scale(difficulty);
  FeatureDimensions d;
  d.riser = kFinalRiser * s;
  d.tread = kTread;
  d.gap_width = kFinalGapWidth * s;
  d.gap_depth = kGapDepth;
  d.slab_height = kFinalSlabHeight * s;
  d.rough_amplitude = 0.01 + 0.01 * difficulty;
  return d;
}

double characteristic_dimension(TerrainFamily family, int difficulty) {
  const FeatureDimensions d = feature_dimensions(difficulty);
  switch (family) {
    case TerrainFamily::kStairsUp:
    case TerrainFamily::kStairsDown: return d.riser;
    case TerrainFamily::kPlatformUp:
    case TerrainFamily::kPlatformDown: return d.slab_height;
    case TerrainFamily::kGap: return d.gap_width;
    case TerrainFamily::kRough: return d.rough_amplitude;
  }
  return 0.0;
}

double feature_period(const TerrainSpec& spec) {
  const FeatureDimensions d = feature_dimensions(spec.difficulty);
  switch (spec.family) {
    case TerrainFamily::kStairsUp:
    case TerrainFamily::kStairsDown: return d.tread;
    case TerrainFamily::kPlatformUp:
    case TerrainFamily::kPlatformDown: return kPlatformFoothold;
    case TerrainFamily::kGap: return d.gap_width;
    case TerrainFamily::kRough: return 3.0 * spec.cell_resolution;
  }
  return 0.0;
}

Heightfield::Heightfield(int rows, int cols, double resolution, double origin_x,
                         double origin_y, std::vector<float> heights)
    : rows_(rows),
      cols_(cols),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_y_(origin_y),
      heights_(std::move(heights)) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("heightfield needs at least 2x2 nodes");
  if (!(resolution > 0.0)) throw std::invalid_argument("heightfield resolution must be > 0");
  if (heights_.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("heightfield size does not match rows * cols");
  }
  for (float h : heights_) {
    if (!std::isfinite(h)) throw std::invalid_argument("heightfield heights must be finite");
  }
  const auto [lo, hi] = std::minmax_element(heights_.begin(), heights_.end());
  min_height_ = *lo;
  max_height_ = *hi;

  block_rows_ = (rows_ - 2) / kBlockCells + 1;
  block_cols_ = (cols_ - 2) / kBlockCells + 1;
  block_max_.assign(static_cast<std::size_t>(block_rows_) * block_cols_,
                    -std::numeric_limits<float>::infinity());
  for (int br = 0; br < block_rows_; ++br) {
    const int r1 = std::min(rows_ - 1, (br + 1) * kBlockCells);
    for (int bc = 0; bc < block_cols_; ++bc) {
      const int c1 = std::min(cols_ - 1, (bc + 1) * kBlockCells);
      float m = -std::numeric_limits<float>::infinity();
      for (int r = br * kBlockCells; r <= r1; ++r) {
        for (int c = bc * kBlockCells; c <= c1; ++c) m = std::max(m, height(r, c));
      }
      block_max_[static_cast<std::size_t>(br) * block_cols_ + bc] = m;
    }
  }
}

bool Heightfield::contains(double x, double y) const {
  constexpr double kSlack = 1e-9;
  return x >= origin_x_ - kSlack && x <= max_x() + kSlack && y >= origin_y_ - kSlack &&
         y <= max_y() + kSlack;
}

double Heightfield::height_at(double x, double y) const {
  const double fx = std::clamp((x - origin_x_) / resolution_, 0.0, static_cast<double>(cols_ - 1));
  const double fy = std::clamp((y - origin_y_) / resolution_, 0.0, static_cast<double>(rows_ - 1));
  const int c0 = std::min(static_cast<int>(fx), cols_ - 2);
  const int r0 = std::min(static_cast<int>(fy), rows_ - 2);
  const double tx = fx - c0;
  const double ty = fy - r0;
  const float* row0 = &heights_[static_cast<std::size_t>(r0) * cols_ + c0];
  const float* row1 = row0 + cols_;
  const double h0 = row0[0] + tx * (row0[1] - row0[0]);
  const double h1 = row1[0] + tx * (row1[1] - row1[0]);
  return h0 + ty * (h1 - h0);
}

Heightfield make_terrain(const TerrainSpec& spec) {
  check_difficulty(spec.difficulty);
  if (!(spec.cell_resolution > 0.0)) throw std::invalid_argument("cell_resolution must be > 0");
  if (!(spec.length > 0.0) || !(spec.width > 0.0)) {
    throw std::invalid_argument("terrain extent must be positive");
  }
  if (spec.length < 2.0 * feature_period(spec)) {
    throw std::invalid_argument("terrain length " + std::to_string(spec.length) +
                                " m is shorter than two feature periods");
  }
  const int cols = static_cast<int>(std::lround(spec.length / spec.cell_resolution));
  const int rows = static_cast<int>(std::lround(spec.width / spec.cell_resolution));
  if (rows < 2 || cols < 2) throw std::invalid_argument("terrain extent below two cells");

  const double res = spec.cell_resolution;
  const double origin_x = 0.0;
  const double origin_y = -0.5 * (rows - 1) * res;
  const FeatureDimensions dim = feature_dimensions(spec.difficulty);
  const double x0 = origin_x + 0.5 * spec.length;

  if (spec.family == TerrainFamily::kRough) {
    return Heightfield(rows, cols, res, origin_x, origin_y,
                       rough_relief(spec, rows, cols, dim.rough_amplitude));
  }

  // Every other family is uniform across y: build one profile along x.
  std::vector<float> profile(static_cast<std::size_t>(cols), 0.0f);
  for (int c = 0; c < cols; ++c) {
    const double x = origin_x + c * res;
    const int k = steps_since(x, x0, dim.tread);
    double h = 0.0;
    switch (spec.family) {
      case TerrainFamily::kStairsUp:
        if (k >= 0) h = dim.riser * (k + 1);
        break;
      case TerrainFamily::kStairsDown:
        if (k >= 0) h = -dim.riser * (k + 1);
        break;
      case TerrainFamily::kPlatformUp:
        if (x >= x0 - 1e-9) h = dim.slab_height;
        break;
      case TerrainFamily::kPlatformDown:
        if (x < x0 - 1e-9) h = dim.slab_height;
        break;
      case TerrainFamily::kGap:
        if (x >= x0 - 1e-9 && x < x0 + dim.gap_width - 1e-9) h = -dim.gap_depth;
        break;
      case TerrainFamily::kRough:
        break;
    }
    profile[static_cast<std::size_t>(c)] = static_cast<float>(h);
  }
  std::vector<float> heights(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    std::copy(profile.begin(), profile.end(), heights.begin() + static_cast<std::ptrdiff_t>(r) * cols);
  }
  return Heightfield(rows, cols, res, origin_x, origin_y, std::move(heights));
}

HeightScan height_scan(const Heightfield& field, const BasePose& pose) {
  HeightScan scan;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  for (int i = 0; i < HeightScan::kForwardSamples; ++i) {
    const double fwd = HeightScan::forward_offset(i);
    for (int j = 0; j < HeightScan::kLateralSamples; ++j) {
      const double lat = HeightScan::lateral_offset(j);
      const double x = pose.x + c * fwd - s * lat;
      const double y = pose.y + s * fwd + c * lat;
      const std::size_t k = HeightScan::index(i, j);
      scan.valid[k] = field.contains(x, y);
      scan.values[k] = static_cast<float>(field.height_at(x, y) - pose.z);
    }
  }
  return scan;
}

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_hfld(const std::filesystem::path& path, const Heightfield& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write("HFLD", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.cols()));
  put<float>(out, static_cast<float>(field.resolution()));
  put<float>(out, static_cast<float>(field.origin_x()));
  put<float>(out, static_cast<float>(field.origin_y()));
  const auto h = field.heights();
  out.write(reinterpret_cast<const char*>(h.data()),
            static_cast<std::streamsize>(h.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Heightfield read_hfld(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HFLD", 4) != 0) {
    throw std::runtime_error("bad HFLD magic: " + path.string());
  }
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  const auto res = get<float>(in);
  const auto ox = get<float>(in);
  const auto oy = get<float>(in);
  if (!in || rows > (1u << 16) || cols > (1u << 16)) {
    throw std::runtime_error("bad HFLD header: " + path.string());
  }
  std::vector<float> heights(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(heights.data()),
          static_cast<std::streamsize>(heights.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated HFLD: " + path.string());
  return Heightfield(static_cast<int>(rows), static_cast<int>(cols), res, ox, oy,
                     std::move(heights));
}

void write_pgm16(const std::filesystem::path& path, const Heightfield& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const double offset = field.min_height();
  const double range = static_cast<double>(field.max_height()) - offset;
  const double scale = range > 0.0 ? range / 65535.0 : 1.0;
  out.precision(17);
  out << "P5\n# scale " << scale << " offset " << offset << " (height_m = value * scale + offset)\n"
      << field.cols() << ' ' << field.rows() << "\n65535\n";
  for (float h : field.heights()) {
    const auto v = static_cast<std::uint16_t>(std::lround((h - offset) / scale));
    out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xFF));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sdf
