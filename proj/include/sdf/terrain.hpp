#ifndef SDF_TERRAIN_HPP
#define SDF_TERRAIN_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace sdf {

enum class TerrainFamily { kStairsUp, kStairsDown, kPlatformUp, kPlatformDown, kGap, kRough };

inline constexpr std::array<TerrainFamily, 6> kAllTerrainFamilies = {
    TerrainFamily::kStairsUp,     TerrainFamily::kStairsDown, TerrainFamily::kPlatformUp,
    TerrainFamily::kPlatformDown, TerrainFamily::kGap,        TerrainFamily::kRough};

std::string_view to_string(TerrainFamily family);
/// Accepts the names produced by to_string ("stairs_up", "gap", ...).
TerrainFamily parse_terrain_family(std::string_view name);

/// Critic / discriminator routing classes. Values are the 1-based head index.
enum class TerrainCategory : int { kStairsPlatforms = 1, kGapCrossing = 2, kRough = 3 };
inline constexpr int kNumTerrainCategories = 3;

inline constexpr int kDifficultyLevels = 20;

struct TerrainSpec {
  TerrainFamily family = TerrainFamily::kStairsUp;
  int difficulty = 0;              // [0, 19]
  double cell_resolution = 0.05;   // m
  double length = 8.0;             // m, along +x (direction of travel)
  double width = 4.0;              // m, along y
  std::uint64_t seed = 0;
};

TerrainCategory terrain_category(TerrainFamily family);
inline TerrainCategory terrain_category(const TerrainSpec& spec) {
  return terrain_category(spec.family);
}

/// Physical dimensions realized at a difficulty level. Level 19 reproduces the
/// evaluation terrains (15 cm risers on 30 cm treads, 0.45 m gaps, 0.40 m
/// platforms); level 0 is 10% of those values and intermediate levels are
/// linear in between. Treads stay at 0.30 m at every level.
struct FeatureDimensions {
  double riser = 0.0;            // stairs step height
  double tread = 0.0;            // stairs step depth
  double gap_width = 0.0;        // trench width along x
  double gap_depth = 0.0;        // trench floor below ground
  double slab_height = 0.0;      // platform height
  double rough_amplitude = 0.0;  // peak relief of rough terrain
};

FeatureDimensions feature_dimensions(int difficulty);

/// The dimension that defines difficulty for a family (riser, gap width, slab
/// height or rough amplitude).
double characteristic_dimension(TerrainFamily family, int difficulty);

/// Shortest x-extent of one repeating feature. A terrain must be at least twice
/// this long: the first half is a flat approach and the feature starts at the
/// midpoint.
double feature_period(const TerrainSpec& spec);

/// Regular grid of terrain heights. Node (row, col) sits at world position
/// (origin_x + col * resolution, origin_y + row * resolution); rows run along y
/// and columns along x. Between nodes the surface is bilinear.
class Heightfield {
 public:
  Heightfield(int rows, int cols, double resolution, double origin_x, double origin_y,
              std::vector<float> heights);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double max_x() const { return origin_x_ + (cols_ - 1) * resolution_; }
  double max_y() const { return origin_y_ + (rows_ - 1) * resolution_; }

  float height(int row, int col) const {
    return heights_[static_cast<std::size_t>(row) * cols_ + col];
  }
  std::span<const float> heights() const { return heights_; }

  double x_of(int col) const { return origin_x_ + col * resolution_; }
  double y_of(int row) const { return origin_y_ + row * resolution_; }

  bool contains(double x, double y) const;

  /// Bilinear height at a world point; points outside are clamped to the
  /// nearest edge node.
  double height_at(double x, double y) const;

  float min_height() const { return min_height_; }
  float max_height() const { return max_height_; }

  /// Cells per side of the coarse tiles used to bound heights in a region.
  static constexpr int kBlockCells = 8;
  int block_rows() const { return block_rows_; }
  int block_cols() const { return block_cols_; }
  /// Maximum node height over tile (block_row, block_col), boundary nodes
  /// included, so it bounds the bilinear surface over the whole tile.
  float block_max(int block_row, int block_col) const {
    return block_max_[static_cast<std::size_t>(block_row) * block_cols_ + block_col];
  }

  friend bool operator==(const Heightfield&, const Heightfield&) = default;

 private:
  int rows_;
  int cols_;
  double resolution_;
  double origin_x_;
  double origin_y_;
  std::vector<float> heights_;
  float min_height_;
  float max_height_;
  int block_rows_;
  int block_cols_;
  std::vector<float> block_max_;
};

/// Builds the terrain for a spec. Pure: identical specs give bit-identical
/// grids. The field spans x in [0, length) and is centered on y = 0.
///
/// Throws std::invalid_argument for a difficulty outside [0, 19], a
/// non-positive resolution or extent, or an extent shorter than two feature
/// periods.
Heightfield make_terrain(const TerrainSpec& spec);

/// Robot base pose used for privileged scans. z is the base height in world.
struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double z = 0.0;
};

/// Ego-centric 1.6 m x 1.0 m window of terrain heights, sampled every 0.05 m:
/// 33 samples along the heading by 21 across, 693 in total.
///
/// The window reaches 1.2 m ahead of the base and 0.4 m behind it and is
/// centered laterally. Storage is forward-major: sample (i, j) is at index
/// i * 21 + j, with i = 0 the rearmost line (x = -0.4 m) and j = 0 the
/// leftmost sample (y = +0.5 m) in the base frame.
class HeightScan {
 public:
  static constexpr int kForwardSamples = 33;
  static constexpr int kLateralSamples = 21;
  static constexpr int kSamples = kForwardSamples * kLateralSamples;
  static constexpr double kResolution = 0.05;
  static constexpr double kRearReach = 0.4;
  static constexpr double kForwardReach = 1.2;
  static constexpr double kHalfWidth = 0.5;

  /// Base-frame offset (forward, left) of sample (i, j).
  static double forward_offset(int i) { return -kRearReach + kResolution * i; }
  static double lateral_offset(int j) { return kHalfWidth - kResolution * j; }

  float at(int i, int j) const { return values[index(i, j)]; }
  bool valid_at(int i, int j) const { return valid[index(i, j)]; }
  static std::size_t index(int i, int j) {
    return static_cast<std::size_t>(i) * kLateralSamples + static_cast<std::size_t>(j);
  }

  /// Terrain height minus base z, in meters.
  std::array<float, kSamples> values{};
  /// False where the sample point fell outside the field and was clamped.
  std::array<bool, kSamples> valid{};
};

HeightScan height_scan(const Heightfield& field, const BasePose& pose);

/// Little-endian binary heightfield: "HFLD", u32 rows, u32 cols,
/// f32 resolution, f32 origin_x, f32 origin_y, then rows*cols f32 heights
/// in row-major order.
void write_hfld(const std::filesystem::path& path, const Heightfield& field);
Heightfield read_hfld(const std::filesystem::path& path);

/// 16-bit binary PGM (big-endian samples, per the format). Heights map to
/// value = round((h - offset) / scale); offset and scale are written into a
/// header comment.
void write_pgm16(const std::filesystem::path& path, const Heightfield& field);

}  // namespace sdf

#endif  // SDF_TERRAIN_HPP
