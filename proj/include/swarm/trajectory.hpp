#pragma once

#include <vector>

#include <json.hpp>

#include "swarm/geometry.hpp"

namespace swarm {

// State of the position/yaw curves at one instant.
struct TrajectorySample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Vec3 jerk = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
  double yaw_accel = 0.0;
};

struct TimedPoint {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
};

// Piecewise-polynomial position (degree 3) + yaw (degree 2) trajectory on
// clamped uniform B-spline bases sharing one interval grid. With N intervals
// there are N+3 position and N+2 yaw control points; the clamped basis makes
// the endpoints interpolate the first/last control points exactly.
class SplineTrajectory {
 public:
  static constexpr int kPosDegree = 3;
  static constexpr int kYawDegree = 2;

  SplineTrajectory() = default;
  SplineTrajectory(std::vector<Vec3> position_ctrl, std::vector<double> yaw_ctrl,
                   double t_in, double t_f);

  // Constant trajectory (hover) over [t_in, t_f].
  static SplineTrajectory constant(const Vec3& position, double yaw, double t_in,
                                   double t_f, int intervals = 1);

  double t_in() const { return t_in_; }
  double t_f() const { return t_f_; }
  double duration() const { return t_f_ - t_in_; }
  int num_intervals() const { return static_cast<int>(pos_ctrl_.size()) - kPosDegree; }

  const std::vector<Vec3>& position_control_points() const { return pos_ctrl_; }
  const std::vector<double>& yaw_control_points() const { return yaw_ctrl_; }
  const std::vector<double>& position_knots() const { return pos_knots_; }
  const std::vector<double>& yaw_knots() const { return yaw_knots_; }

  // De Boor evaluation with analytic derivatives. Throws std::domain_error
  // for t outside [t_in, t_f].
  TrajectorySample evaluate(double t) const;

  // Control points whose convex hull contains the position curve over
  // interval j (B-spline locality: points j..j+3).
  std::vector<Vec3> interval_hull(int interval) const;

  // Control points of the derivative spline grouped per interval; bounding
  // them bounds the velocity curve over that interval.
  std::vector<std::vector<Vec3>> velocity_control_points() const;

  // Flat derivative control point sequences.
  std::vector<Vec3> velocity_ctrl_flat() const;
  std::vector<Vec3> acceleration_ctrl_flat() const;
  std::vector<Vec3> jerk_ctrl_flat() const;
  std::vector<double> yaw_rate_ctrl_flat() const;

  double interval_start(int interval) const;
  double interval_end(int interval) const;
  int interval_of(double t) const;

  // n >= 2 samples at uniform parameter spacing including both endpoints.
  std::vector<TimedPoint> sample_uniform(int n) const;

  nlohmann::json to_json() const;
  static SplineTrajectory from_json(const nlohmann::json& j);

 private:
  std::vector<Vec3> pos_ctrl_;
  std::vector<double> yaw_ctrl_;
  std::vector<double> pos_knots_;
  std::vector<double> yaw_knots_;
  double t_in_ = 0.0;
  double t_f_ = 1.0;
};

// Clamped uniform knot vector for the given degree and interval count.
std::vector<double> clamped_uniform_knots(int degree, int intervals, double t_in,
                                          double t_f);

}  // namespace swarm
