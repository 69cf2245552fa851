#include "sdf/camera.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sdf {

namespace {

constexpr int kBisectionSteps = 10;

// Index of the last march sample that provably lies above the terrain,
// starting from sample k: the ray stays inside the current tile and above its
// maximum height. Returns k when nothing can be skipped.
std::int64_t last_clear_sample(const Heightfield& field, const Eigen::Vector3d& o,
                               const Eigen::Vector3d& d, double t0, double dt, std::int64_t k,
                               double t_max) {
  const double t = t0 + static_cast<double>(k) * dt;
  const double x = o.x() + t * d.x();
  const double y = o.y() + t * d.y();
  if (!field.contains(x, y)) return k;
  const double res = field.resolution();
  const int col = std::clamp(static_cast<int>((x - field.origin_x()) / res), 0, field.cols() - 2);
  const int row = std::clamp(static_cast<int>((y - field.origin_y()) / res), 0, field.rows() - 2);
  const int bc = col / Heightfield::kBlockCells;
  const int br = row / Heightfield::kBlockCells;
  const double top = field.block_max(br, bc);
  if (o.z() + t * d.z() <= top) return k;

  const double x0 = field.x_of(bc * Heightfield::kBlockCells);
  const double x1 = field.x_of(std::min(field.cols() - 1, (bc + 1) * Heightfield::kBlockCells));
  const double y0 = field.y_of(br * Heightfield::kBlockCells);
  const double y1 = field.y_of(std::min(field.rows() - 1, (br + 1) * Heightfield::kBlockCells));
  double t_safe = t_max;
  if (d.x() > 0.0) t_safe = std::min(t_safe, (x1 - o.x()) / d.x());
  if (d.x() < 0.0) t_safe = std::min(t_safe, (x0 - o.x()) / d.x());
  if (d.y() > 0.0) t_safe = std::min(t_safe, (y1 - o.y()) / d.y());
  if (d.y() < 0.0) t_safe = std::min(t_safe, (y0 - o.y()) / d.y());
  if (d.z() < 0.0) t_safe = std::min(t_safe, (top - o.z()) / d.z());
  const double steps = std::floor((t_safe - t0) / dt * (1.0 - 1e-12) - 1e-9);
  if (!(steps > static_cast<double>(k))) return k;
  // Never skip past the last full step before t_max.
  const double last = std::ceil((t_max - t0) / dt) - 1.0;
  return static_cast<std::int64_t>(std::min(steps, std::max(last, static_cast<double>(k))));
}

}  // namespace

Eigen::Matrix3d rotation_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Matrix3d optical_from_body() {
  Eigen::Matrix3d m;
  m.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);
  m.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  m.col(2) = Eigen::Vector3d(1.0, 0.0, 0.0);
  return m;
}

Pose look_pose(const Eigen::Vector3d& position, double yaw, double pitch_down) {
  Pose p;
  p.position = position;
  p.rotation = rotation_rpy(0.0, pitch_down, yaw) * optical_from_body();
  return p;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  if (cx < 0.0 || cx > width - 1 || cy < 0.0 || cy > height - 1) {
    throw std::invalid_argument("principal point outside the image");
  }
}

void StereoRig::validate() const {
  left.intrinsics.validate();
  right.intrinsics.validate();
  if (!(baseline >= 0.0)) throw std::invalid_argument("baseline must be >= 0");
  if (left.intrinsics.width != right.intrinsics.width ||
      left.intrinsics.height != right.intrinsics.height) {
    throw std::invalid_argument("left and right images must share dimensions");
  }
}

DepthImage render_depth(const Heightfield& field, const Pose& camera,
                        const CameraIntrinsics& intr, const RenderOptions& opts) {
  intr.validate();
  const Eigen::Vector3d& o = camera.position;
  if (o.z() <= field.height_at(o.x(), o.y())) {
    throw std::invalid_argument("camera is at or below the terrain surface");
  }
  const double step = opts.step_fraction * field.resolution();
  const double top = field.max_height();
  DepthImage img(intr.height, intr.width);

  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      // Unnormalized ray with unit optical z, so the ray parameter is z-depth.
      const Eigen::Vector3d d =
          camera.rotation * Eigen::Vector3d((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      const double len = d.norm();
      const double t_max = opts.max_distance / len;
      const double dt = step / len;
      auto gap = [&](double t) {
        return o.z() + t * d.z() - field.height_at(o.x() + t * d.x(), o.y() + t * d.y());
      };

      // Nothing can be hit above the highest node.
      double t0 = 0.0;
      if (o.z() > top) {
        if (d.z() >= 0.0) continue;
        t0 = (top - o.z()) / d.z();
        if (t0 > t_max) continue;
      }
      std::int64_t k = 0;
      double t = t0;
      double g = gap(t);
      double t_prev = t;
      double g_prev = g;
      bool hit = g <= 0.0;
      while (!hit && t < t_max) {
        const std::int64_t skip = last_clear_sample(field, o, d, t0, dt, k, t_max);
        if (skip > k) {
          const double ts = t0 + static_cast<double>(skip) * dt;
          const double gs = gap(ts);
          if (gs > 0.0) {
            k = skip;
            t = ts;
            g = gs;
          }
        }
        t_prev = t;
        g_prev = g;
        ++k;
        t = std::min(t0 + static_cast<double>(k) * dt, t_max);
        g = gap(t);
        hit = g <= 0.0;
      }
      if (!hit) continue;

      double lo = t_prev;
      double hi = t;
      double g_lo = g_prev;
      double g_hi = g;
      if (lo < hi) {
        for (int k = 0; k < kBisectionSteps; ++k) {
          const double mid = 0.5 * (lo + hi);
          const double gm = gap(mid);
          if (gm > 0.0) {
            lo = mid;
            g_lo = gm;
          } else {
            hi = mid;
            g_hi = gm;
          }
        }
      }
      const double denom = g_lo - g_hi;
      const double t_hit = denom > 0.0 ? lo + (hi - lo) * g_lo / denom : hi;
      if (t_hit * len > opts.max_distance || !(t_hit > 0.0)) continue;
      img.at(v, u) = static_cast<float>(t_hit);
    }
  }
  return img;
}

StereoRig sample_rig(const StereoRig& nominal, const RngStream& rng) {
  StereoRig rig = nominal;
  const DrawSequence intr = rng.at(DrawPurpose::kRigIntrinsics);
  const DrawSequence extr = rng.at(DrawPurpose::kRigExtrinsics);
  const double s_h = intr.uniform(0, 0.90, 1.10);
  const double s_v = intr.uniform(1, 0.90, 1.10);
  Eigen::Vector3d dp;
  Eigen::Vector3d dtheta;
  for (int i = 0; i < 3; ++i) {
    dp[i] = extr.uniform(static_cast<std::uint64_t>(i), -0.05, 0.05);
    dtheta[i] = extr.uniform(static_cast<std::uint64_t>(3 + i), -0.10, 0.10);
  }
  for (CameraModel* cam : {&rig.left, &rig.right}) {
    cam->intrinsics.fx *= s_h;
    cam->intrinsics.fy *= s_v;
    cam->extrinsics.position_offset += dp;
    cam->extrinsics.rpy_offset += dtheta;
  }
  return rig;
}

namespace {

Pose camera_pose(const Pose& torso, const CameraMount& mount, const CameraExtrinsics& extr,
                 double lateral) {
  const Eigen::Matrix3d mount_rot = torso.rotation * rotation_rpy(0.0, mount.pitch_down, 0.0);
  Pose p;
  p.position = torso.position + torso.rotation * mount.position + mount_rot * extr.position_offset;
  p.rotation = mount_rot * rotation_rpy(extr.rpy_offset) * optical_from_body();
  p.position += p.rotation * Eigen::Vector3d(lateral, 0.0, 0.0);
  return p;
}

}  // namespace

std::pair<Pose, Pose> stereo_camera_poses(const Pose& torso, const StereoRig& rig) {
  const double half = 0.5 * rig.baseline;
  return {camera_pose(torso, rig.mount, rig.left.extrinsics, -half),
          camera_pose(torso, rig.mount, rig.right.extrinsics, half)};
}

StereoPair render_stereo(const Heightfield& field, const Pose& torso, const StereoRig& rig,
                         const RenderOptions& opts) {
  rig.validate();
  const auto [left_pose, right_pose] = stereo_camera_poses(torso, rig);
  return {render_depth(field, left_pose, rig.left.intrinsics, opts),
          render_depth(field, right_pose, rig.right.intrinsics, opts)};
}

}  // namespace sdf
