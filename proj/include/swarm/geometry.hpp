#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace swarm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Wrapped difference a - b in (-pi, pi]. Angle comparisons go through this,
// never through raw subtraction.
double angle_diff(double a, double b);

// Planar rigid pose (SE(2)). Yaw is stored wrapped to (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(wrap_angle(yaw_)) {}

  static Pose2 identity() { return {}; }
  Vec2 translation() const { return {x, y}; }
  Mat2 rotation() const;
};

Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);
Vec2 apply(const Pose2& p, const Vec2& point);

// Spatial rigid pose (SE(3)) with a unit quaternion kept normalized after
// every composition so long simulations don't drift off the manifold.
struct Pose3 {
  Vec3 translation = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Pose3 identity() { return {}; }
};

Pose3 compose(const Pose3& a, const Pose3& b);
Pose3 inverse(const Pose3& p);
Vec3 apply(const Pose3& p, const Vec3& point);

// Pose of a body moving in the ground plane at altitude: position + yaw
// about world z.
Pose3 pose3_from_planar(const Vec3& position, double yaw);

// Camera mount poses X^body_camera. Camera convention: +z optical axis,
// +x right in image, +y down in image.
Pose3 forward_camera_mount();                  // optical axis along body +x
Pose3 pitched_camera_mount(double pitch_down); // forward mount pitched toward the ground

// Pinhole intrinsics (fx, fy, cx, cy in pixels).
struct CameraIntrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 320.0;
  double cy = 240.0;
};

// Throws std::invalid_argument when fx or fy is not positive.
void validate(const CameraIntrinsics& k);

}  // namespace swarm
