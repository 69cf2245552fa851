#ifndef SDF_CAMERA_HPP
#define SDF_CAMERA_HPP

#include <Eigen/Geometry>

#include "sdf/depth_image.hpp"
#include "sdf/rng.hpp"
#include "sdf/terrain.hpp"

namespace sdf {

/// Rigid transform. `rotation` maps frame vectors into world.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

/// Roll-pitch-yaw (intrinsic z-y'-x'') rotation, robot convention: x forward,
/// y left, z up. Positive pitch tilts the x axis toward -z (nose down).
Eigen::Matrix3d rotation_rpy(double roll, double pitch, double yaw);
inline Eigen::Matrix3d rotation_rpy(const Eigen::Vector3d& rpy) {
  return rotation_rpy(rpy.x(), rpy.y(), rpy.z());
}

/// Columns are the optical axes (x right, y down, z forward) expressed in the
/// robot-convention frame.
Eigen::Matrix3d optical_from_body();

/// Optical-frame pose of a camera whose body frame is at `position` with the
/// given yaw and downward pitch.
Pose look_pose(const Eigen::Vector3d& position, double yaw, double pitch_down);

struct CameraIntrinsics {
  double fx = 21.0;
  double fy = 21.0;
  double cx = 19.5;
  double cy = 14.5;
  int width = 40;
  int height = 30;

  /// Throws std::invalid_argument on non-positive focal lengths, empty image or
  /// a principal point outside the image.
  void validate() const;
};

struct CameraExtrinsics {
  Eigen::Vector3d position_offset = Eigen::Vector3d::Zero();  // m, mount frame
  Eigen::Vector3d rpy_offset = Eigen::Vector3d::Zero();       // rad
};

struct CameraModel {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

/// Nominal camera mount on the torso (robot convention).
struct CameraMount {
  Eigen::Vector3d position{0.0, 0.0, 0.65};
  double pitch_down = 1.0471975511965976;  // 60 deg
};

struct StereoRig {
  CameraModel left;
  CameraModel right;
  double baseline = 0.05;  // m
  CameraMount mount;

  /// b >= 0 (0 is the degenerate single-view rig) and matching image sizes.
  void validate() const;
};

struct RenderOptions {
  double max_distance = 4.0;  // m along the ray
  double step_fraction = 0.5; // march step as a fraction of cell resolution
};

/// Ray-casts a z-depth image (distance along the optical axis) of the
/// heightfield. `camera` is an optical-frame pose. Rays are marched at fixed
/// steps, the first crossing is bracketed and refined; rays that do not reach
/// the surface within max_distance are invalid (0).
///
/// Throws std::invalid_argument if the camera is at or below the terrain.
DepthImage render_depth(const Heightfield& field, const Pose& camera,
                        const CameraIntrinsics& intr, const RenderOptions& opts = {});

/// Draws the startup calibration randomization: fx and fy scaled by
/// independent U(0.90, 1.10) factors, mount offsets dp ~ U(-0.05, 0.05)^3 m and
/// dtheta ~ U(-0.10, 0.10)^3 rad. One draw is applied to both cameras since
/// they share one housing.
StereoRig sample_rig(const StereoRig& nominal, const RngStream& rng);

/// Optical-frame poses of the left and right cameras for a torso pose. The
/// cameras sit at -b/2 and +b/2 along the optical x axis.
std::pair<Pose, Pose> stereo_camera_poses(const Pose& torso, const StereoRig& rig);

struct StereoPair {
  DepthImage left;
  DepthImage right;
};

StereoPair render_stereo(const Heightfield& field, const Pose& torso, const StereoRig& rig,
                         const RenderOptions& opts = {});

}  // namespace sdf

#endif  // SDF_CAMERA_HPP
