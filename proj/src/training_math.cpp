#include "sdf/training_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdf {

double route(TerrainCategory category, const std::array<double, kNumTerrainCategories>& heads) {
  const int k = static_cast<int>(category);
  if (k < 1 || k > kNumTerrainCategories) throw std::invalid_argument("route: bad category");
  return heads[static_cast<std::size_t>(k - 1)];
}

namespace {

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  return q.w() < 0.0 ? Eigen::Quaterniond(-q.w(), -q.x(), -q.y(), -q.z()) : q;
}

void require_unit(double norm, const char* what) {
  if (std::abs(norm - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string("amp_features: ") + what + " is not unit norm");
  }
}

}  // namespace

AmpObservation amp_features(const RobotState& s) {
  if (s.joint_pos.size() != s.default_joint_pos.size() ||
      s.joint_pos.size() != s.joint_vel.size()) {
    throw std::invalid_argument("amp_features: joint vectors differ in length");
  }
  if (s.key_body_positions.size() != s.key_body_orientations.size()) {
    throw std::invalid_argument("amp_features: key body positions and orientations differ");
  }
  require_unit(s.torso_orientation.norm(), "torso orientation");
  require_unit(s.gravity.norm(), "gravity");

  const Eigen::Matrix3d world_to_body = s.torso_orientation.toRotationMatrix().transpose();
  const Eigen::Quaterniond inv_torso = s.torso_orientation.conjugate();

  AmpObservation o;
  o.q_rel = s.joint_pos - s.default_joint_pos;
  o.qd_rel = s.joint_vel;
  o.lin_vel_b = world_to_body * s.torso_lin_vel;
  o.ang_vel_b = world_to_body * s.torso_ang_vel;
  o.gravity_b = world_to_body * s.gravity;
  for (std::size_t i = 0; i < s.key_body_positions.size(); ++i) {
    require_unit(s.key_body_orientations[i].norm(), "key body orientation");
    o.body_pos_b.push_back(world_to_body * (s.key_body_positions[i] - s.torso_position));
    o.body_quat_b.push_back(canonical((inv_torso * s.key_body_orientations[i]).normalized()));
  }
  return o;
}

Eigen::VectorXd AmpObservation::flatten() const {
  const Eigen::Index n_bodies = static_cast<Eigen::Index>(body_pos_b.size());
  Eigen::VectorXd v(q_rel.size() + qd_rel.size() + 9 + 3 * n_bodies + 4 * n_bodies);
  Eigen::Index k = 0;
  v.segment(k, q_rel.size()) = q_rel;
  k += q_rel.size();
  v.segment(k, qd_rel.size()) = qd_rel;
  k += qd_rel.size();
  v.segment<3>(k) = lin_vel_b;
  k += 3;
  v.segment<3>(k) = ang_vel_b;
  k += 3;
  v.segment<3>(k) = gravity_b;
  k += 3;
  for (const auto& p : body_pos_b) {
    v.segment<3>(k) = p;
    k += 3;
  }
  for (const auto& q : body_quat_b) {
    v.segment<4>(k) << q.w(), q.x(), q.y(), q.z();
    k += 4;
  }
  return v;
}

std::string_view to_string(RewardId id) {
  switch (id) {
    case RewardId::kVelExp: return "vel_exp";
    case RewardId::kVelDir: return "vel_dir";
    case RewardId::kContact: return "contact";
  }
  return "unknown";
}

void RewardConfig::validate() const {
  if (!(sigma > 0.0) || !(epsilon > 0.0) || !(h_max > 0.0)) {
    throw std::invalid_argument("RewardConfig: sigma, epsilon and h_max must be > 0");
  }
}

double reward_vel_exp(const Eigen::Vector2d& v_cmd, const Eigen::Vector2d& v_robot, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("reward_vel_exp: sigma must be > 0");
  return std::exp(-(v_cmd - v_robot).squaredNorm() / (sigma * sigma));
}

double reward_vel_dir(const Eigen::Vector2d& v_cmd, const Eigen::Vector2d& v_robot,
                      double epsilon) {
  const double speed = v_cmd.norm();
  if (!(speed > 0.0)) throw std::invalid_argument("reward_vel_dir: |v_cmd| must be > 0");
  const double along = v_robot.dot(v_cmd / speed);
  return std::min(along, speed) / (speed + epsilon);
}

double reward_contact(const std::vector<std::vector<double>>& foot_scans,
                      const std::vector<bool>& contact, double h_max) {
  if (!(h_max > 0.0)) throw std::invalid_argument("reward_contact: h_max must be > 0");
  if (foot_scans.size() != contact.size()) {
    throw std::invalid_argument("reward_contact: one contact flag per foot");
  }
  double total = 0.0;
  for (std::size_t f = 0; f < foot_scans.size(); ++f) {
    if (!contact[f] || foot_scans[f].empty()) continue;
    const double shift = std::clamp(foot_scans[f].front(), -h_max, h_max);
    double mean = 0.0;
    for (double h : foot_scans[f]) mean += std::clamp(h, -h_max, h_max) - shift;
    mean /= static_cast<double>(foot_scans[f].size());
    double var = 0.0;
    for (double h : foot_scans[f]) {
      const double e = std::clamp(h, -h_max, h_max) - shift - mean;
      var += e * e;
    }
    total += std::sqrt(var / static_cast<double>(foot_scans[f].size()));
  }
  return total;
}

std::vector<RewardId> applicable_rewards(TerrainCategory category) {
  switch (category) {
    case TerrainCategory::kStairsPlatforms: return {RewardId::kVelExp, RewardId::kContact};
    case TerrainCategory::kGapCrossing: return {RewardId::kVelDir};
    case TerrainCategory::kRough: return {RewardId::kVelExp};
  }
  throw std::invalid_argument("applicable_rewards: bad category");
}

double terrain_reward(TerrainCategory category, const RewardInputs& in, const RewardConfig& cfg) {
  cfg.validate();
  double r = 0.0;
  for (RewardId id : applicable_rewards(category)) {
    switch (id) {
      case RewardId::kVelExp:
        r += cfg.w_vel_exp * reward_vel_exp(in.v_cmd, in.v_robot, cfg.sigma);
        break;
      case RewardId::kVelDir:
        r += cfg.w_vel_dir * reward_vel_dir(in.v_cmd, in.v_robot, cfg.epsilon);
        break;
      case RewardId::kContact:
        r += cfg.w_contact * reward_contact(in.foot_scans, in.contact, cfg.h_max);
        break;
    }
  }
  return r;
}

LatentBatch::LatentBatch(RowMatrixXf values) : values_(std::move(values)) {
  if (values_.rows() < 2) throw std::invalid_argument("LatentBatch: need N >= 2");
  if (values_.cols() < 1) throw std::invalid_argument("LatentBatch: need D >= 1");
  if (!values_.allFinite()) throw std::invalid_argument("LatentBatch: non-finite entry");
}

namespace {

double mean_row_sq_distance(const RowMatrixXf& a, const RowMatrixXf& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
  if (a.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
  const Eigen::MatrixXd diff = a.cast<double>() - b.cast<double>();
  return diff.rowwise().squaredNorm().sum() / static_cast<double>(a.rows());
}

}  // namespace

double behavior_loss(const RowMatrixXf& mu_deploy, const RowMatrixXf& mu_priv) {
  return mean_row_sq_distance(mu_deploy, mu_priv, "behavior_loss");
}

double denoise_loss(const LatentBatch& z_clean, const LatentBatch& z_aug) {
  return mean_row_sq_distance(z_clean.values(), z_aug.values(), "denoise_loss");
}

double kl_loss(const LatentBatch& z, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("kl_loss: epsilon must be >= 0");
  const Eigen::MatrixXd x = z.values().cast<double>();
  const double n = static_cast<double>(x.rows());
  double kl = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).sum() / n;
    const double var = (x.col(j).array() - mu).square().sum() / n + epsilon;
    if (!(var > 0.0)) throw std::domain_error("kl_loss: zero variance; use epsilon > 0");
    kl += 0.5 * (var + mu * mu - 1.0 - std::log(var));
  }
  return kl;
}

double total_loss(double behavior, double denoise, double kl, const LossWeights& w) {
  return behavior + w.denoise * denoise + w.kl * kl;
}

double avg_power(const PowerTrace& trace) {
  if (trace.torques.rows() < 1) throw std::invalid_argument("avg_power: need T >= 1");
  if (trace.torques.rows() != trace.velocities.rows() ||
      trace.torques.cols() != trace.velocities.cols()) {
    throw std::invalid_argument("avg_power: torque/velocity shape mismatch");
  }
  return trace.torques.cwiseProduct(trace.velocities).rowwise().norm().mean();
}

double pdr(double p_rdt, double p_clean) {
  if (!(p_clean > 0.0)) throw std::invalid_argument("pdr: p_clean must be > 0");
  return (p_rdt - p_clean) / p_clean * 100.0;
}

}  // namespace sdf
