#ifndef SDF_TRAINING_MATH_HPP
#define SDF_TRAINING_MATH_HPP

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sdf/terrain.hpp"

namespace sdf {

/// f32 row-major matrix, the layout tensors cross the API in.
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Multi-critic / multi-discriminator routing

/// Selects the head for a terrain category. The same rule routes critic values
/// and discriminator scores.
double route(TerrainCategory category, const std::array<double, kNumTerrainCategories>& heads);

// ---------------------------------------------------------------------------
// AMP observation

/// World-frame robot state needed for the motion-prior observation.
struct RobotState {
  Eigen::VectorXd joint_pos;
  Eigen::VectorXd default_joint_pos;
  Eigen::VectorXd joint_vel;
  Eigen::Quaterniond torso_orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d torso_lin_vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d torso_ang_vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d torso_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, -1.0);
  /// Key bodies (feet and hands by default) in the order the caller configures.
  std::vector<Eigen::Vector3d> key_body_positions;
  std::vector<Eigen::Quaterniond> key_body_orientations;
};

/// Torso-centric observation. Quaternions are stored (w, x, y, z) with w >= 0.
struct AmpObservation {
  Eigen::VectorXd q_rel;
  Eigen::VectorXd qd_rel;
  Eigen::Vector3d lin_vel_b;
  Eigen::Vector3d ang_vel_b;
  Eigen::Vector3d gravity_b;
  std::vector<Eigen::Vector3d> body_pos_b;
  std::vector<Eigen::Quaterniond> body_quat_b;

  /// Concatenation [q_rel, qd_rel, v_b, w_b, g_b, p_body_b..., q_body_b...].
  Eigen::VectorXd flatten() const;
};

/// Throws std::invalid_argument on mismatched joint vectors or body lists, or
/// a gravity vector / quaternion that is not unit within 1e-6.
AmpObservation amp_features(const RobotState& state);

// ---------------------------------------------------------------------------
// Terrain-specific rewards

enum class RewardId { kVelExp, kVelDir, kContact };
std::string_view to_string(RewardId id);

struct RewardConfig {
  double sigma = 0.5;      // m/s, velocity tracking temperature
  double epsilon = 1e-3;   // directional reward stabilizer
  double h_max = 0.2;      // m, contact scan clip
  double w_vel_exp = 1.0;
  double w_vel_dir = 1.0;
  double w_contact = -1.0;

  void validate() const;
};

/// exp(-|v_cmd - v_robot|^2 / sigma^2)
double reward_vel_exp(const Eigen::Vector2d& v_cmd, const Eigen::Vector2d& v_robot, double sigma);

/// min(v_robot . d_cmd, |v_cmd|) / (|v_cmd| + epsilon). Requires |v_cmd| > 0.
double reward_vel_dir(const Eigen::Vector2d& v_cmd, const Eigen::Vector2d& v_robot,
                      double epsilon);

/// Sum over feet in contact of the population std of the foot's height scan
/// after clipping to [-h_max, h_max].
double reward_contact(const std::vector<std::vector<double>>& foot_scans,
                      const std::vector<bool>& contact, double h_max);

/// Which rewards a category uses.
std::vector<RewardId> applicable_rewards(TerrainCategory category);

struct RewardInputs {
  Eigen::Vector2d v_cmd = Eigen::Vector2d::Zero();
  Eigen::Vector2d v_robot = Eigen::Vector2d::Zero();
  std::vector<std::vector<double>> foot_scans;
  std::vector<bool> contact;
};

/// Weighted sum of the rewards applicable to `category`.
double terrain_reward(TerrainCategory category, const RewardInputs& in, const RewardConfig& cfg);

// ---------------------------------------------------------------------------
// Distillation losses

/// Encoder features z in R^{N x D}. N >= 2 and all entries finite.
class LatentBatch {
 public:
  explicit LatentBatch(RowMatrixXf values);
  Eigen::Index batch() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  const RowMatrixXf& values() const { return values_; }

 private:
  RowMatrixXf values_;
};

/// Mean over the batch of |mu_deploy - mu_priv|^2.
double behavior_loss(const RowMatrixXf& mu_deploy, const RowMatrixXf& mu_priv);

/// Mean over the batch of |z_clean - z_aug|^2 (rows paired).
double denoise_loss(const LatentBatch& z_clean, const LatentBatch& z_aug);

inline constexpr double kDefaultKlEpsilon = 1e-5;

/// KL(N(mu, diag(sigma^2)) || N(0, I)) for the batch statistics of z: mu and
/// sigma^2 are population moments per dimension, sigma^2 gets +epsilon, and
/// the per-dimension terms are summed over D.
double kl_loss(const LatentBatch& z, double epsilon = kDefaultKlEpsilon);

struct LossWeights {
  double denoise = 0.1;
  double kl = 0.1;
};

double total_loss(double behavior, double denoise, double kl, const LossWeights& w = {});

// ---------------------------------------------------------------------------
// Power metrics

/// Joint torques and velocities per step, T x J each.
struct PowerTrace {
  Eigen::MatrixXd torques;
  Eigen::MatrixXd velocities;
};

/// (1/T) sum_t |tau_t * qd_t|_2 (elementwise product), in watts.
double avg_power(const PowerTrace& trace);

/// Percent power increase under realistic noise; requires p_clean > 0.
double pdr(double p_rdt, double p_clean);

}  // namespace sdf

#endif  // SDF_TRAINING_MATH_HPP
