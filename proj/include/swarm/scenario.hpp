#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarm/geometry.hpp"

namespace swarm {

// Thrown by Scenario parsing/validation; the message starts with the JSON
// path of the offending field (e.g. "agents[0].radius_m: must be positive").
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TrajectoryMode { Circle, PositionExchange, Planner };
enum class LandmarkLayout { PadsGrid, RandomObjects };
enum class DriftKind { None, ConstantBias, LinearDrift };

std::string to_string(TrajectoryMode m);
std::string to_string(LandmarkLayout l);
std::string to_string(DriftKind k);

// Odometry corruption of one agent. Bias/rate are (x m, y m, yaw deg) and
// (m/s, m/s, deg/s); conversion to radians happens at injection time.
struct DriftSpec {
  DriftKind kind = DriftKind::None;
  Vec3 bias = Vec3::Zero();
  Vec3 rate = Vec3::Zero();
};

struct PoseSpec {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
  double yaw_deg = 0.0;
};

struct CircleSpec {
  Vec2 center = Vec2::Zero();
  double radius_m = 3.0;
  double period_s = 30.0;
  double phase_deg = 0.0;
  double altitude_m = 1.2;
};

struct ExchangeSpec {
  double period_s = 20.0;      // one leg of the ping-pong
  double lane_offset_m = 0.4;  // perpendicular bulge separating the lanes
};

struct AgentSpec {
  PoseSpec start;
  PoseSpec goal;
  double radius_m = 0.25;
  TrajectoryMode mode = TrajectoryMode::Circle;
  CircleSpec circle;
  ExchangeSpec exchange;
  DriftSpec drift;
  double clock_offset_s = 0.0;
};

struct LandmarkLayoutSpec {
  LandmarkLayout layout = LandmarkLayout::PadsGrid;
  // pads grid
  int rows = 4;
  int cols = 4;
  double spacing_m = 1.5;
  double jitter_m = 0.2;
  // random objects
  int count = 20;
  double extent_m[4] = {-4.0, 4.0, -4.0, 4.0};  // xmin, xmax, ymin, ymax
  double diameter_m = 0.5;
};

struct ObstacleSpec {
  Vec3 center = Vec3(0.0, 0.0, 1.0);
  double scale_m = 0.7;
  double period_s = 12.0;
  double phase_s = 0.0;
  double radius_m = 0.3;
};

struct SensingSpec {
  double pixel_sigma = 1.0;
  double detection_probability = 0.95;
  int kappa_frames = 10;           // delete a landmark after this many misses
  double camera_pitch_deg = 40.0;  // downward pitch of the mount
  double fov_deg = 90.0;
  double sigma_t = 0.05;  // m, ground-plane measurement sigma
  double stretch = 2.0;   // range-direction covariance stretch
};

struct PlannerOverrides {
  bool uncertainty_aware = true;
  bool motion_uncertainty_terms = true;
  Vec3 v_limit = Vec3(3.0, 3.0, 2.0);
  double replan_period_s = 1.0;
  double plan_start_s = 2.5;
  double goal_tolerance_m = 0.3;
  double peer_margin_m = 0.15;  // extra radius absorbing alignment residuals
};

struct Scenario {
  int schema_version = 1;
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  double duration_s = 30.0;
  double detector_rate_hz = 5.0;
  double alignment_epoch_s = 1.0;
  double message_delay_min_s = 0.0;
  double message_delay_max_s = 0.05;
  double delay_check_s = 0.3;
  bool alignment_enabled = true;
  LandmarkLayoutSpec landmarks;
  std::vector<AgentSpec> agents;
  std::vector<ObstacleSpec> obstacles;
  SensingSpec sensing;
  PlannerOverrides planner;

  // Throws ScenarioError with a field-path message on the first violation.
  void validate() const;

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
};

// One benchmark case: a scenario plus the grid coordinates it came from.
struct SuiteCase {
  int case_id = 0;
  std::string traj_label;   // Circle | POC | Planner
  std::string drift_label;  // None | Const. | Linear
  std::string axes_label;   // None | Translation | Yaw | Both
  Scenario scenario;
};

// Known suites: pads-tableII, random-tableIII, multiagent-pads,
// multiagent-random, planner-ablation. Throws ScenarioError on unknown
// names. base_seed offsets every case seed so repeated suite runs can
// resample.
std::vector<SuiteCase> make_suite(const std::string& name, std::uint64_t base_seed = 0);

std::vector<std::string> suite_names();

}  // namespace swarm
