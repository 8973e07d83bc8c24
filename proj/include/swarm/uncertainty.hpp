#pragma once

#include <vector>

#include <Eigen/Dense>

#include "swarm/geometry.hpp"
#include "swarm/trajectory.hpp"

namespace swarm {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat3x9 = Eigen::Matrix<double, 3, 9>;

// chi-square quantile (inverse CDF) for 2 or 3 degrees of freedom.
double chi_square_quantile(int dof, double level);

// Position/velocity/acceleration belief about one obstacle or peer.
struct ObstacleBelief {
  Vec9 mean = Vec9::Zero();
  Mat9 covariance = Mat9::Identity();

  Vec3 position() const { return mean.head<3>(); }
  Vec3 velocity() const { return mean.segment<3>(3); }
  Mat3 position_covariance() const { return covariance.topLeftCorner<3, 3>(); }

  // Throws std::invalid_argument on asymmetry > 1e-9 or eigenvalue < -1e-9.
  void validate() const;
};

struct MotionUncertainty {
  Mat9 covariance = Mat9::Zero();
  Mat3 position_block() const { return covariance.topLeftCorner<3, 3>(); }
};

// Camera FOV cone and the observation-noise ceiling it modulates.
struct FovModel {
  double opening_angle = 1.57;        // rad
  Mat3 R_max = 10.0 * Mat3::Identity();
  double epsilon = 1e-6;
  double max_multiplier = 1e9;        // clamp for the (1-f)/(1+f+eps) factor

  void validate() const;  // throws std::invalid_argument
};

// Constant-acceleration integrator: F = exp(A dt), H selects position.
struct LinearModel {
  Mat9 F = Mat9::Identity();
  Mat3x9 H = Mat3x9::Zero();

  static LinearModel constant_acceleration(double dt);
};

// Positive iff p_camera lies inside the cone of opening angle theta about
// the camera +z axis: -cos(theta/2) + p_z/||p||.
double fov_score(const Vec3& p_camera, double theta);

// R_max * (1 - f)/(1 + f + eps); multiplier clamped at fov.max_multiplier
// (sets *clamped when the clamp engages).
Mat3 fov_noise(double f, const FovModel& fov, bool* clamped = nullptr);

Mat9 propagate_open_loop(const Mat9& P, const Mat9& F);

struct StepResult {
  ObstacleBelief belief;
  bool open_loop_fallback = false;
  bool noise_clamped = false;
};

// One predict+update covariance step with FOV-dependent measurement noise
// evaluated at the predicted obstacle position in the camera frame. Mean
// advances by F only (no measurement realization).
StepResult propagate_step(const ObstacleBelief& belief, const LinearModel& model,
                          const Pose3& camera, const FovModel& fov);

// N steps along the ego trajectory; the camera pose at step k comes from the
// trajectory sample at t_in + k*dt (clamped to the domain) via the mount.
std::vector<ObstacleBelief> propagate_horizon(const ObstacleBelief& belief,
                                              const LinearModel& model,
                                              const SplineTrajectory& ego,
                                              double dt, int N,
                                              const Pose3& camera_mount,
                                              const FovModel& fov);

// Unknown-space covariance chain: at step k the measurement noise is
// evaluated at the first p_traj sample with timestamp >= t0 + k*dt (the
// space the agent is about to enter); samples closer than 1 cm to the
// camera are skipped.
std::vector<MotionUncertainty> propagate_motion_uncertainty(
    const std::vector<Pose3>& cameras, const std::vector<TimedPoint>& p_traj,
    const Mat9& P0, const LinearModel& model, const FovModel& fov, double t0,
    double dt);

// Element-wise v_limit / sqrt(diag(P_pos)); throws std::domain_error when a
// diagonal entry is not strictly positive.
Vec3 velocity_bound(const Mat3& P_pos, const Vec3& v_limit);

struct Ellipsoid {
  Vec3 semi_axes = Vec3::Zero();  // sorted ascending with eigenvalues
  Mat3 axes = Mat3::Identity();   // columns are the axis directions
};

// Semi-axis i = sqrt(chi2_3(level) * lambda_i) along eigenvector i.
Ellipsoid confidence_ellipsoid(const Mat3& P_pos, double level);

Mat9 symmetrized(const Mat9& P);

}  // namespace swarm
