#include "swarm/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarm {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

Mat2 Pose2::rotation() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Vec2 t = a.translation() + a.rotation() * b.translation();
  return {t.x(), t.y(), a.yaw + b.yaw};
}

Pose2 inverse(const Pose2& p) {
  const Vec2 t = -(p.rotation().transpose() * p.translation());
  return {t.x(), t.y(), -p.yaw};
}

Vec2 apply(const Pose2& p, const Vec2& point) {
  return p.rotation() * point + p.translation();
}

Pose3 compose(const Pose3& a, const Pose3& b) {
  Pose3 out;
  out.translation = a.translation + a.rotation * b.translation;
  out.rotation = (a.rotation * b.rotation).normalized();
  return out;
}

Pose3 inverse(const Pose3& p) {
  Pose3 out;
  out.rotation = p.rotation.conjugate().normalized();
  out.translation = -(out.rotation * p.translation);
  return out;
}

Vec3 apply(const Pose3& p, const Vec3& point) {
  return p.rotation * point + p.translation;
}

Pose3 pose3_from_planar(const Vec3& position, double yaw) {
  Pose3 out;
  out.translation = position;
  out.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ())).normalized();
  return out;
}

Pose3 forward_camera_mount() {
  // camera z -> body x, camera x -> body -y, camera y -> body -z
  Mat3 r;
  r << 0, 0, 1,
      -1, 0, 0,
       0, -1, 0;
  Pose3 out;
  out.rotation = Eigen::Quaterniond(r).normalized();
  return out;
}

Pose3 pitched_camera_mount(double pitch_down) {
  Pose3 pitch;
  pitch.rotation =
      Eigen::Quaterniond(Eigen::AngleAxisd(pitch_down, Vec3::UnitY())).normalized();
  return compose(pitch, forward_camera_mount());
}

void validate(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0))
    throw std::invalid_argument("camera intrinsics: fx and fy must be positive");
}

}  // namespace swarm
