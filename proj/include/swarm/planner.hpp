#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/parallel.hpp"
#include "swarm/trajectory.hpp"
#include "swarm/uncertainty.hpp"

namespace swarm {

struct InitialState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

// Obstacle as the planner sees it: a belief to propagate plus a physical
// half-extent. The model must be built for the caller's propagation step.
struct PlannerObstacle {
  ObstacleBelief belief;
  LinearModel model;
  double radius = 0.0;
};

struct PeerTrajectory {
  SplineTrajectory trajectory = SplineTrajectory::constant(Vec3::Zero(), 0.0, 0.0, 1.0);
  double radius = 0.25;
};

struct PlannerConfig {
  // objective weights
  double alpha_jerk = 0.01;
  double alpha_yaw_accel = 0.1;
  double alpha_time = 1.0;
  double alpha_goal_pos = 50.0;
  double alpha_goal_yaw = 2.0;
  // explicit view-tracking of known obstacles; 0 leaves the camera steered
  // only by the uncertainty terms
  double alpha_tracking = 0.0;

  // kinodynamic limits
  Vec3 v_limit = Vec3(3.0, 3.0, 2.0);      // nominal per-axis speed limit
  Vec3 a_max = Vec3(8.0, 8.0, 6.0);
  Vec3 j_max = Vec3(30.0, 30.0, 20.0);
  double yaw_rate_max = 2.0;               // bound on yaw derivative points
  double yaw_value_max = 1e9;              // optional bound on yaw points
  bool bound_yaw_rate = true;
  bool bound_yaw_value = false;

  double agent_radius = 0.25;

  // discretization
  int intervals = 6;     // spline intervals over the horizon
  int samples = 10;      // look-ahead points sampled from the candidate

  // solver settings
  int multi_start = 4;
  int outer_iterations = 3;
  int inner_iterations = 50;
  double penalty_initial = 1e2;
  double penalty_growth = 10.0;
  double feasibility_tol = 1e-6;
  double plane_margin = 1e-4;     // strict inequality slack for planes
  double confidence_level = 0.95;
  double horizon_min = 0.8;
  double horizon_max = 40.0;

  // unknown-space covariance seed (position/velocity/acceleration variances)
  Vec3 motion_p0 = Vec3(1.0, 0.25, 0.1);
  bool uncertainty_aware = true;
  // ablation switch: drop only the unknown-space chain and its velocity
  // throttle while obstacle covariance propagation stays active
  bool motion_uncertainty_terms = true;

  FovModel fov;
  Pose3 camera_mount = forward_camera_mount();
  ExecPolicy exec;

  void validate() const;  // throws std::invalid_argument
};

struct PlanningProblem {
  InitialState initial;
  double t_in = 0.0;
  Vec3 goal_position = Vec3::Zero();
  double goal_yaw = 0.0;
  std::vector<PlannerObstacle> obstacles;
  std::vector<PeerTrajectory> peers;
  std::optional<SplineTrajectory> warm_start;
  PlannerConfig config;
};

// Plane with the ego side negative: n.q + d <= -margin for ego hull points,
// n.q + d >= margin for inflated obstacle hull points. `obstacle` indexes
// problem.obstacles first, then problem.peers.
struct SeparatingPlane {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;
  int obstacle = 0;
  int interval = 0;
};

// Decision variables. Position control points 0..2 are pinned by the initial
// state and the last three are tied to one terminal point (rest at T);
// analogously yaw pins 0..1 and ties the last two. free_pos stacks the
// remaining interior points x,y,z then the terminal point; free_yaw likewise.
struct DecisionVars {
  Eigen::VectorXd free_pos;
  Eigen::VectorXd free_yaw;
  double horizon = 1.0;  // T - t_in
  std::vector<SeparatingPlane> planes;
};

int free_pos_size(int intervals);
int free_yaw_size(int intervals);

// Rebuilds the spline the variables describe. Throws std::invalid_argument
// on size mismatch or non-positive horizon.
SplineTrajectory decode(const DecisionVars& vars, const PlanningProblem& problem);

// Covariances and obstacle means propagated along one candidate, one entry
// per spline interval (value at the interval end).
struct UncertaintyContext {
  std::vector<std::vector<Mat3>> obstacle_cov;   // [obstacle][interval]
  std::vector<std::vector<Vec3>> obstacle_mean;  // [obstacle][half-boundary 0..2N]
  std::vector<Mat3> motion_cov;                  // [interval]
};

UncertaintyContext propagate_candidate(const SplineTrajectory& traj,
                                       const PlanningProblem& problem);

// Conservative inflation: every hull vertex is replaced by the corners of an
// axis-aligned box sized by the confidence ellipsoid of P_pos plus radius.
std::vector<Vec3> inflate_obstacle(const std::vector<Vec3>& hull, const Mat3& P_pos,
                                   double agent_radius, double level = 0.95);

struct CostBreakdown {
  double jerk = 0.0;
  double yaw_accel = 0.0;
  double time = 0.0;
  double goal_pos = 0.0;
  double goal_yaw = 0.0;
  double tracking = 0.0;
  double total = 0.0;
};

CostBreakdown cost(const DecisionVars& vars, const PlanningProblem& problem);

// Residual convention: inequality entries feasible iff <= 0, equality entries
// are absolute errors. The two-argument form propagates covariances from the
// candidate itself; the three-argument form evaluates against the supplied
// context.
struct ConstraintResiduals {
  Eigen::VectorXd initial_state;  // equality
  Eigen::VectorXd terminal;       // equality
  Eigen::VectorXd planes;
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
  Eigen::VectorXd jerk;
  Eigen::VectorXd yaw;

  double max_equality() const;
  double max_inequality() const;
};

ConstraintResiduals constraint_residuals(const DecisionVars& vars,
                                         const PlanningProblem& problem);
ConstraintResiduals constraint_residuals(const DecisionVars& vars,
                                         const PlanningProblem& problem,
                                         const UncertaintyContext& ctx);

struct PlannedSolution {
  SplineTrajectory trajectory = SplineTrajectory::constant(Vec3::Zero(), 0.0, 0.0, 1.0);
  std::vector<SeparatingPlane> planes;
  CostBreakdown cost;
  int start_index = 0;
};

struct PlanOutcome {
  std::optional<PlannedSolution> solution;
  std::string infeasible_reason;
  bool feasible() const { return solution.has_value(); }
};

// Multi-start penalty descent over control points, yaw and horizon; planes
// are refreshed in closed form and covariances re-propagated each outer
// iteration. Every returned trajectory has passed audit_feasibility.
PlanOutcome solve(const PlanningProblem& problem);

// Independent dense-sampling audit (>= 200 samples): kinodynamic bounds and
// clearance from every obstacle's inflated box and every peer. Shares no
// code with constraint_residuals. Appends the first failure to *why.
bool audit_feasibility(const SplineTrajectory& traj, const PlanningProblem& problem,
                       std::string* why = nullptr);

struct FovMetrics {
  double known_fov_rate = 0.0;     // percent of samples with obstacles in view
  double known_continuous = 0.0;   // longest uninterrupted stretch, seconds
  double unknown_fov_rate = 0.0;   // percent with the next look-ahead point in view
  double unknown_continuous = 0.0;
};

FovMetrics fov_metrics(const SplineTrajectory& traj,
                       const std::vector<std::function<Vec3(double)>>& obstacles,
                       const FovModel& fov, double dt,
                       const Pose3& camera_mount = forward_camera_mount(),
                       int ptraj_samples = 10);

}  // namespace swarm
