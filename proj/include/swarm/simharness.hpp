#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/scenario.hpp"

namespace swarm {

// Closed three-lobed curve used as the dynamic obstacle's path:
// scale * (sin u + 2 sin 2u, cos u - 2 cos 2u, -sin 3u), u = 2*pi*t/period.
Vec3 trefoil(double t, double scale, double period);

// Analytic velocity/acceleration of the curve (either output may be null).
void trefoil_state(double t, double scale, double period, Vec3* position,
                   Vec3* velocity, Vec3* acceleration);

// World-frame drift transform D(t): constant bias or linearly accumulating
// offset (bias/rate stored in degrees, returned pose in radians).
Pose2 drift_transform(const DriftSpec& spec, double t);

// Drifted estimate of a true pose: D(t) composed with the pose.
Pose2 inject_drift(const Pose2& true_pose, const DriftSpec& spec, double t);

struct AlignmentErrorStats {
  Vec3 mean = Vec3::Zero();     // |x| m, |y| m, |yaw| deg
  Vec3 std_dev = Vec3::Zero();  // population convention
};

// Per-epoch error = estimate composed with the inverse of the true relative
// drift D_i(t) * D_j(t)^-1, decomposed per axis; statistics are taken over
// the absolute per-axis errors.
AlignmentErrorStats alignment_error_stats(
    const std::vector<std::pair<double, Pose2>>& estimates, const DriftSpec& drift_i,
    const DriftSpec& drift_j);

struct CollisionEvent {
  double t = 0.0;  // onset of the overlap
  int a = 0;
  int b = 0;
};

// Independent post-hoc collision oracle: reports separated->overlapping
// transitions (plus initially-overlapping pairs) over a dense resampling of
// the true positions. Bodies with index >= first_passive_body (obstacles)
// are not checked against each other.
std::vector<CollisionEvent> collision_event_list(
    const std::vector<std::function<Vec3(double)>>& positions,
    const std::vector<double>& radii, int first_passive_body, double t0, double t1,
    double dt);

int collision_events(const std::vector<std::function<Vec3(double)>>& positions,
                     const std::vector<double>& radii, int first_passive_body,
                     double t0, double t1, double dt);

struct Metrics {
  double travel_time_s = 0.0;
  double computation_time_ms = 0.0;  // mean wall time per solve; sidecar only
  int collisions = 0;
  double known_fov_rate_pct = 0.0;
  double known_fov_continuous_s = 0.0;
  double unknown_fov_rate_pct = 0.0;
  double unknown_fov_continuous_s = 0.0;
  Vec3 alignment_err_mean = Vec3::Zero();  // m, m, deg
  Vec3 alignment_err_std = Vec3::Zero();
};

struct RunOutputs {
  Metrics metrics;
  std::string metrics_csv;                // header + one row
  std::vector<std::string> events;        // JSONL lines, timestamp-ordered
  std::string alignment_series_csv;       // per-epoch error series (plotdata)
  std::vector<double> solve_wall_ms;      // nondeterministic; kept out of the above
};

// Deterministic discrete-event simulation of one scenario.
RunOutputs run(const Scenario& scenario);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& case_label, const std::string& traj_label,
                            const std::string& drift_label, const std::string& axes_label,
                            const Metrics& m);

// Writes metrics.csv, events.jsonl, plotdata/alignment_errors.csv and the
// timings sidecar under out_dir (created if needed).
void write_outputs(const RunOutputs& outputs, const std::string& out_dir);

// Protocol stress executor: agents repeatedly commit randomized smooth
// trajectories through the two-step publication scheme under sampled message
// delays. The oracle renders the safety invariant instant by instant: at each
// sample time the latest commitment of every agent is evaluated, pairs whose
// domains both contain the instant must keep their separation.
struct StressConfig {
  int agents = 4;
  double delay_min_s = 0.0;
  double delay_max_s = 0.3;
  double delay_check_s = 0.3;
  double duration_s = 30.0;
  double arena_radius_m = 4.0;
  double agent_radius_m = 0.25;
  std::uint64_t seed = 1;
};

struct StressResult {
  int conflicts = 0;
  int commits = 0;
  int vetoes = 0;
};

StressResult run_deconfliction_stress(const StressConfig& cfg);

}  // namespace swarm
