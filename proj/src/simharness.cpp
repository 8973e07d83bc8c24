#include "swarm/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "swarm/alignment.hpp"
#include "swarm/deconfliction.hpp"
#include "swarm/mapping.hpp"
#include "swarm/planner.hpp"
#include "swarm/trajectory.hpp"
#include "swarm/uncertainty.hpp"

namespace swarm {

namespace {

constexpr double kPi = std::numbers::pi;

double to_deg(double rad) { return rad * 180.0 / kPi; }
double to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

Vec3 trefoil(double t, double scale, double period) {
  if (scale <= 0.0 || period <= 0.0)
    throw std::invalid_argument("trefoil: scale and period must be positive");
  const double u = 2.0 * kPi * t / period;
  return scale * Vec3(std::sin(u) + 2.0 * std::sin(2.0 * u),
                      std::cos(u) - 2.0 * std::cos(2.0 * u), -std::sin(3.0 * u));
}

void trefoil_state(double t, double scale, double period, Vec3* position,
                   Vec3* velocity, Vec3* acceleration) {
  const double u = 2.0 * kPi * t / period;
  const double w = 2.0 * kPi / period;
  if (position) *position = trefoil(t, scale, period);
  if (velocity)
    *velocity = scale * w *
                Vec3(std::cos(u) + 4.0 * std::cos(2.0 * u),
                     -std::sin(u) + 4.0 * std::sin(2.0 * u), -3.0 * std::cos(3.0 * u));
  if (acceleration)
    *acceleration = scale * w * w *
                    Vec3(-std::sin(u) - 8.0 * std::sin(2.0 * u),
                         -std::cos(u) + 8.0 * std::cos(2.0 * u), 9.0 * std::sin(3.0 * u));
}

Pose2 drift_transform(const DriftSpec& spec, double t) {
  switch (spec.kind) {
    case DriftKind::None:
      return Pose2::identity();
    case DriftKind::ConstantBias:
      return Pose2(spec.bias.x(), spec.bias.y(), to_rad(spec.bias.z()));
    case DriftKind::LinearDrift:
      return Pose2(t * spec.rate.x(), t * spec.rate.y(), to_rad(t * spec.rate.z()));
  }
  throw std::logic_error("drift_transform: unknown kind");
}

Pose2 inject_drift(const Pose2& true_pose, const DriftSpec& spec, double t) {
  return compose(drift_transform(spec, t), true_pose);
}

AlignmentErrorStats alignment_error_stats(
    const std::vector<std::pair<double, Pose2>>& estimates, const DriftSpec& drift_i,
    const DriftSpec& drift_j) {
  AlignmentErrorStats out;
  if (estimates.empty()) return out;
  std::vector<Vec3> errs;
  errs.reserve(estimates.size());
  for (const auto& [t, est] : estimates) {
    const Pose2 truth =
        compose(drift_transform(drift_i, t), inverse(drift_transform(drift_j, t)));
    const Pose2 err = compose(est, inverse(truth));
    errs.emplace_back(std::abs(err.x), std::abs(err.y), std::abs(to_deg(err.yaw)));
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& e : errs) mean += e;
  mean /= static_cast<double>(errs.size());
  Vec3 var = Vec3::Zero();
  for (const auto& e : errs) var += (e - mean).cwiseAbs2();
  var /= static_cast<double>(errs.size());
  out.mean = mean;
  out.std_dev = var.cwiseSqrt();
  return out;
}

std::vector<CollisionEvent> collision_event_list(
    const std::vector<std::function<Vec3(double)>>& positions,
    const std::vector<double>& radii, int first_passive_body, double t0, double t1,
    double dt) {
  if (positions.size() != radii.size())
    throw std::invalid_argument("collision_events: positions/radii size mismatch");
  if (dt <= 0.0 || t1 < t0)
    throw std::invalid_argument("collision_events: bad sampling window");
  const int n = static_cast<int>(positions.size());
  const int steps = std::max(1, static_cast<int>(std::llround((t1 - t0) / dt)));
  std::vector<char> prev(static_cast<std::size_t>(n) * n, 0);
  std::vector<Vec3> p(static_cast<std::size_t>(n));
  std::vector<CollisionEvent> events;
  for (int s = 0; s <= steps; ++s) {
    const double t = t0 + (t1 - t0) * s / steps;
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = positions[i](t);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (i >= first_passive_body && j >= first_passive_body) continue;
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        const bool hit =
            (p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(j)]).norm() <
            radii[static_cast<std::size_t>(i)] + radii[static_cast<std::size_t>(j)];
        if (hit && !prev[idx]) events.push_back({t, i, j});
        prev[idx] = hit ? 1 : 0;
      }
    }
  }
  return events;
}

int collision_events(const std::vector<std::function<Vec3(double)>>& positions,
                     const std::vector<double>& radii, int first_passive_body,
                     double t0, double t1, double dt) {
  return static_cast<int>(
      collision_event_list(positions, radii, first_passive_body, t0, t1, dt).size());
}

namespace {

// ---------------------------------------------------------------------------
// discrete-event core

enum class EventKind { Delivery, DetectorFrame, AlignEpoch, Replan, FinishPub };

struct MapPacket {
  int sender = 0;
  LocalMap map;
};

struct Event {
  double t = 0.0;
  int priority = 0;  // deliveries first at equal stamps, then sensing, then planning
  long seq = 0;
  int agent = 0;
  EventKind kind = EventKind::Delivery;
  std::variant<std::monostate, TrajectoryMessage, MapPacket> payload;
};

int priority_of(EventKind k) {
  switch (k) {
    case EventKind::Delivery: return 0;
    case EventKind::DetectorFrame: return 1;
    case EventKind::AlignEpoch: return 2;
    case EventKind::Replan: return 3;
    case EventKind::FinishPub: return 4;
  }
  return 5;
}

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.seq > b.seq;
  }
};

struct BelievedState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

struct AgentRuntime {
  AgentSpec spec;
  LocalMap map;
  SyntheticDetector detector;
  std::map<int, LocalMap> peer_maps;
  std::map<int, Pose2> estimates;  // X^{self}_{peer}: peer frame -> own frame
  std::map<int, bool> estimate_valid;
  std::optional<ProtocolAgent> protocol;
  std::vector<SplineTrajectory> segments;  // believed-frame plan history
  std::map<int, std::vector<TrajectoryMessage>> held_msgs;  // awaiting registration
  bool goal_logged = false;
};

// registration fits above this RMS are treated as misregistrations; fits
// supported by only a handful of landmarks must be tighter still, since a
// small consistent set can match the wrong part of the landmark field
constexpr double kResidualGate = 0.15;
constexpr double kSparseResidualGate = 0.06;
constexpr int kSparseInlierCount = 5;
// frame misalignments evolve slowly, so a registration that spins the frame
// away from the current estimate is a symmetry flip, not a correction
constexpr double kYawJumpGate = 0.25 * kPi;

struct Sim {
  const Scenario& sc;
  std::mt19937_64 rng;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
  long next_seq = 0;
  std::vector<AgentRuntime> agents;
  std::vector<TrueLandmark> world;
  std::vector<std::pair<double, std::string>> events_log;  // (stamp, JSONL line)
  std::vector<std::pair<double, Pose2>> est_series;  // agent 0 about agent 1
  bool est_series_started = false;
  std::vector<double> solve_wall_ms;
  CameraIntrinsics intrinsics;
  Pose3 mount;
  double fov_rad = 1.57;

  explicit Sim(const Scenario& s) : sc(s), rng(s.seed) {
    mount = pitched_camera_mount(to_rad(sc.sensing.camera_pitch_deg));
    fov_rad = to_rad(sc.sensing.fov_deg);
  }

  void push(Event e) {
    e.priority = priority_of(e.kind);
    e.seq = next_seq++;
    queue.push(std::move(e));
  }

  double delay_draw() {
    return std::uniform_real_distribution<double>(sc.message_delay_min_s,
                                                  sc.message_delay_max_s)(rng);
  }
  double u01() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

  void log(nlohmann::json j) {
    events_log.emplace_back(j.at("t").get<double>(), j.dump());
  }

  // -- world ----------------------------------------------------------------

  void generate_landmarks() {
    const auto& l = sc.landmarks;
    if (l.layout == LandmarkLayout::PadsGrid) {
      std::uniform_real_distribution<double> jit(-l.jitter_m, l.jitter_m);
      for (int r = 0; r < l.rows; ++r) {
        for (int c = 0; c < l.cols; ++c) {
          const double x = (c - 0.5 * (l.cols - 1)) * l.spacing_m + jit(rng);
          const double y = (r - 0.5 * (l.rows - 1)) * l.spacing_m + jit(rng);
          world.push_back({Vec2(x, y), l.diameter_m});
        }
      }
    } else {
      std::uniform_real_distribution<double> ux(l.extent_m[0], l.extent_m[1]);
      std::uniform_real_distribution<double> uy(l.extent_m[2], l.extent_m[3]);
      for (int k = 0; k < l.count; ++k) {
        const double x = ux(rng);
        const double y = uy(rng);
        world.push_back({Vec2(x, y), l.diameter_m});
      }
    }
  }

  Vec3 obstacle_true_position(const ObstacleSpec& o, double t) const {
    return o.center + trefoil(t + o.phase_s, o.scale_m, o.period_s);
  }

  Vec2 survey_center() const {
    const auto& l = sc.landmarks;
    if (l.layout == LandmarkLayout::RandomObjects)
      return Vec2(0.5 * (l.extent_m[0] + l.extent_m[1]),
                  0.5 * (l.extent_m[2] + l.extent_m[3]));
    return Vec2::Zero();  // the pads grid is generated centered on the origin
  }

  // yaw keeping the landmark field in view; fall back to the motion bearing
  double aim_yaw(const Vec2& position, double fallback) const {
    const Vec2 d = survey_center() - position;
    return d.norm() > 1e-6 ? std::atan2(d.y(), d.x()) : fallback;
  }

  // -- believed / true kinematic state --------------------------------------

  BelievedState believed_state(int i, double t) const {
    const AgentSpec& spec = agents[static_cast<std::size_t>(i)].spec;
    BelievedState b;
    switch (spec.mode) {
      case TrajectoryMode::Circle: {
        const CircleSpec& c = spec.circle;
        const double w = 2.0 * kPi / c.period_s;
        const double th = w * t + to_rad(c.phase_deg);
        b.position = Vec3(c.center.x() + c.radius_m * std::cos(th),
                          c.center.y() + c.radius_m * std::sin(th), c.altitude_m);
        b.velocity = Vec3(-c.radius_m * w * std::sin(th), c.radius_m * w * std::cos(th), 0.0);
        b.acceleration =
            Vec3(-c.radius_m * w * w * std::cos(th), -c.radius_m * w * w * std::sin(th), 0.0);
        // face the landmark field so the detector keeps it in view
        b.yaw = aim_yaw(Vec2(b.position.x(), b.position.y()), wrap_angle(th + kPi));
        b.yaw_rate = w;
        break;
      }
      case TrajectoryMode::PositionExchange: {
        const ExchangeSpec& ex = spec.exchange;
        const double L = ex.period_s;
        const long leg = static_cast<long>(std::floor(t / L));
        const double tau = t - static_cast<double>(leg) * L;
        const bool forward = (leg % 2) == 0;
        const Vec3 a3(spec.start.x, spec.start.y, spec.start.z);
        const Vec3 b3(spec.goal.x, spec.goal.y, spec.goal.z);
        const Vec3 from = forward ? a3 : b3;
        const Vec3 to = forward ? b3 : a3;
        const double u = tau / L;
        const double s = 3.0 * u * u - 2.0 * u * u * u;
        const double sd = (6.0 * u - 6.0 * u * u) / L;
        const double sdd = (6.0 - 12.0 * u) / (L * L);
        const Vec2 d2(to.x() - from.x(), to.y() - from.y());
        Vec2 perp(0.0, 0.0);
        if (d2.norm() > 1e-12) perp = Vec2(-d2.y(), d2.x()).normalized();
        const double lane = ex.lane_offset_m;
        const double sp = std::sin(kPi * s), cp = std::cos(kPi * s);
        const Vec2 p2 = Vec2(from.x(), from.y()) + d2 * s + perp * (lane * sp);
        const Vec2 v2 = d2 * sd + perp * (lane * kPi * cp * sd);
        const Vec2 acc2 = d2 * sdd + perp * (lane * kPi * (cp * sdd - kPi * sp * sd * sd));
        b.position = Vec3(p2.x(), p2.y(), from.z() + (to.z() - from.z()) * s);
        b.velocity = Vec3(v2.x(), v2.y(), (to.z() - from.z()) * sd);
        b.acceleration = Vec3(acc2.x(), acc2.y(), (to.z() - from.z()) * sdd);
        const double bearing = (v2.norm() > 1e-9) ? std::atan2(v2.y(), v2.x())
                                                  : std::atan2(d2.y(), d2.x());
        b.yaw = aim_yaw(p2, bearing);
        b.yaw_rate = 0.0;
        break;
      }
      case TrajectoryMode::Planner: {
        const auto& segs = agents[static_cast<std::size_t>(i)].segments;
        const SplineTrajectory* active = &segs.front();
        for (const auto& seg : segs) {
          if (seg.t_in() <= t + 1e-12) active = &seg;
        }
        const double tc = std::clamp(t, active->t_in(), active->t_f());
        const TrajectorySample smp = active->evaluate(tc);
        b.position = smp.position;
        b.velocity = smp.velocity;
        b.acceleration = smp.acceleration;
        b.yaw = smp.yaw;
        b.yaw_rate = smp.yaw_rate;
        if (t < active->t_in() - 1e-12 || t > active->t_f() + 1e-12) {
          b.velocity.setZero();
          b.acceleration.setZero();
          b.yaw_rate = 0.0;
        }
        break;
      }
    }
    return b;
  }

  Pose2 believed_pose2(const BelievedState& b) const {
    return Pose2(b.position.x(), b.position.y(), b.yaw);
  }

  // The believed state lives in the agent's drifted frame; undo D(t) for truth.
  Pose2 true_pose2(int i, double t, const BelievedState& b) const {
    const Pose2 D = drift_transform(agents[static_cast<std::size_t>(i)].spec.drift, t);
    return compose(inverse(D), believed_pose2(b));
  }

  Vec3 true_position(int i, double t) const {
    const BelievedState b = believed_state(i, t);
    const Pose2 tp = true_pose2(i, t, b);
    return Vec3(tp.x, tp.y, b.position.z());
  }

  // -- event handlers ---------------------------------------------------------

  void broadcast(int from, const TrajectoryMessage& msg, double now) {
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (static_cast<int>(j) == from) continue;
      if (!agents[j].protocol) continue;
      Event e;
      e.t = now + delay_draw();
      e.agent = static_cast<int>(j);
      e.kind = EventKind::Delivery;
      e.payload = msg;
      push(std::move(e));
    }
  }

  void on_detector(int i, double t) {
    auto& a = agents[static_cast<std::size_t>(i)];
    const BelievedState b = believed_state(i, t);
    const Pose2 bel = believed_pose2(b);
    const Pose2 tru = true_pose2(i, t, b);
    const Pose3 drifted_ego =
        pose3_from_planar(Vec3(bel.x, bel.y, b.position.z()), bel.yaw);
    const Pose3 truth_ego = pose3_from_planar(Vec3(tru.x, tru.y, b.position.z()), tru.yaw);
    const DetectionBatch batch = detect(world, drifted_ego, truth_ego, a.detector, t, rng);
    std::vector<ProjectedDetection> proj;
    proj.reserve(batch.detections.size());
    for (const auto& d : batch.detections) {
      Vec2 p;
      try {
        p = project_to_ground(d, batch.interp_camera, intrinsics);
      } catch (const std::runtime_error&) {
        continue;  // ray missed the ground plane
      }
      proj.push_back({p, range_stretched_covariance(p, batch.interp_camera.translation,
                                                    sc.sensing.sigma_t, sc.sensing.stretch)});
    }
    const AssociationResult assoc = associate_gnn(proj, a.map, 0.99);
    update_map(a.map, proj, assoc, sc.sensing.kappa_frames, t);
    log({{"kind", "detector"},
         {"t", t},
         {"agent", i},
         {"detections", static_cast<int>(proj.size())},
         {"landmarks", static_cast<int>(a.map.landmarks.size())}});
    const double next = t + 1.0 / sc.detector_rate_hz;
    if (next <= sc.duration_s) push({next, 0, 0, i, EventKind::DetectorFrame, {}});
  }

  void on_align_epoch(int i, double t) {
    auto& a = agents[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      Event e;
      e.t = t + delay_draw();
      e.agent = static_cast<int>(j);
      e.kind = EventKind::Delivery;
      e.payload = MapPacket{i, a.map};
      push(std::move(e));
    }
    for (const auto& [j, pm] : a.peer_maps) {
      AlignmentConfig acfg;
      acfg.min_delta = 1.0 / sc.detector_rate_hz;
      // small consistent sets fit tightly even when wrong; demand enough
      // structure and fall back to the previous estimate otherwise
      acfg.min_inliers = 5;
      try {
        const AlignmentResult res = align(a.map, pm, t, acfg);
        // spurious consistent sets (near-symmetric landmark layouts) fit two
        // to three orders of magnitude worse than genuine ones; gate on the
        // fit residual and keep the previous estimate when it is implausible
        const double gate = static_cast<int>(res.inliers.size()) <= kSparseInlierCount
                                ? kSparseResidualGate
                                : kResidualGate;
        const bool yaw_flip =
            a.estimate_valid[j] &&
            std::abs(wrap_angle(res.transform.yaw - a.estimates[j].yaw)) > kYawJumpGate;
        if (res.residual_rms > gate || yaw_flip) {
          log({{"kind", "alignment_rejected"},
               {"t", t},
               {"agent", i},
               {"peer", j},
               {"residual_rms", res.residual_rms},
               {"inliers", static_cast<int>(res.inliers.size())}});
          continue;
        }
        a.estimates[j] = res.transform;
        a.estimate_valid[j] = true;
        if (a.protocol) {
          const auto held = a.held_msgs.find(j);
          if (held != a.held_msgs.end()) {
            for (TrajectoryMessage m : held->second) {
              m.trajectory = apply_alignment(m.trajectory, res.transform);
              a.protocol->ingest(m, t);
            }
            a.held_msgs.erase(held);
          }
        }
        log({{"kind", "alignment"},
             {"t", t},
             {"agent", i},
             {"peer", j},
             {"x", res.transform.x},
             {"y", res.transform.y},
             {"yaw_deg", to_deg(res.transform.yaw)},
             {"residual_rms", res.residual_rms},
             {"inliers", static_cast<int>(res.inliers.size())}});
      } catch (const std::runtime_error& e) {
        log({{"kind", "alignment_failed"},
             {"t", t},
             {"agent", i},
             {"peer", j},
             {"reason", e.what()}});
      }
    }
    // error series covers the mission window: once every planner agent has
    // parked at its goal the estimate is frozen and no longer exercised
    bool mission_over = false;
    for (const auto& ar : agents) {
      if (ar.spec.mode != TrajectoryMode::Planner) {
        mission_over = false;
        break;
      }
      if (!ar.goal_logged) {
        mission_over = false;
        break;
      }
      mission_over = true;
    }
    if (i == 0 && agents.size() >= 2 && !mission_over) {
      auto it = a.estimate_valid.find(1);
      if (it != a.estimate_valid.end() && it->second) est_series_started = true;
      if (est_series_started) {
        const auto est = a.estimates.find(1);
        est_series.emplace_back(t, est == a.estimates.end() ? Pose2::identity() : est->second);
      }
    }
    const double next = t + sc.alignment_epoch_s;
    if (next <= sc.duration_s) push({next, 0, 0, i, EventKind::AlignEpoch, {}});
  }

  PlannerObstacle make_planner_obstacle(const ObstacleSpec& o, const DriftSpec& drift,
                                        double t_act) const {
    Vec3 p, v, acc;
    trefoil_state(t_act + o.phase_s, o.scale_m, o.period_s, &p, &v, &acc);
    p += o.center;
    // express the belief in the agent's drifted frame
    const Pose2 D = drift_transform(drift, t_act);
    const Mat2 R = D.rotation();
    const Vec2 p2 = apply(D, Vec2(p.x(), p.y()));
    const Vec2 v2 = R * Vec2(v.x(), v.y());
    const Vec2 a2 = R * Vec2(acc.x(), acc.y());
    PlannerObstacle po;
    po.belief.mean << p2.x(), p2.y(), p.z(), v2.x(), v2.y(), v.z(), a2.x(), a2.y(), acc.z();
    po.belief.covariance.setZero();
    po.belief.covariance.topLeftCorner<3, 3>() = 1e-3 * Mat3::Identity();
    po.belief.covariance.block<3, 3>(3, 3) = 1e-2 * Mat3::Identity();
    po.belief.covariance.bottomRightCorner<3, 3>() = 9e-2 * Mat3::Identity();
    po.model = LinearModel::constant_acceleration(0.5);
    po.radius = o.radius_m + 0.2;  // cushion for the extrapolated motion model
    return po;
  }

  void on_replan(int i, double t) {
    auto& a = agents[static_cast<std::size_t>(i)];
    if (t > sc.duration_s - 0.5) return;
    if (a.protocol->waiting()) return;  // FinishPub reschedules

    const Vec3 goal(a.spec.goal.x, a.spec.goal.y, a.spec.goal.z);
    const BelievedState here = believed_state(i, t);
    if ((here.position - goal).norm() <= sc.planner.goal_tolerance_m) {
      if (!a.goal_logged) {
        a.goal_logged = true;
        log({{"kind", "goal_reached"}, {"t", t}, {"agent", i}});
      }
      return;
    }
    if (sc.obstacles.empty()) {
      const SplineTrajectory& com = a.protocol->committed_trajectory();
      const Vec3 end = com.evaluate(com.t_f()).position;
      if ((end - goal).norm() <= sc.planner.goal_tolerance_m) {
        // en route: keep monitoring so the arrival itself gets detected
        push({t + sc.planner.replan_period_s, 0, 0, i, EventKind::Replan, {}});
        return;
      }
    }

    const double t_act = t + sc.delay_check_s + 0.2;
    PlanningProblem prob;
    prob.t_in = t_act;
    const BelievedState st = believed_state(i, t_act);
    prob.initial = {st.position, st.velocity, st.acceleration, st.yaw, st.yaw_rate};
    prob.goal_position = goal;
    prob.goal_yaw = to_rad(a.spec.goal.yaw_deg);
    for (const auto& o : sc.obstacles)
      prob.obstacles.push_back(make_planner_obstacle(o, a.spec.drift, t_act));
    for (const StoredTrajectory* e : a.protocol->store().active_entries())
      prob.peers.push_back({e->trajectory, e->radius + sc.planner.peer_margin_m});
    if (!a.segments.empty() && a.segments.back().t_f() > t_act + 0.2)
      prob.warm_start = a.segments.back();
    PlannerConfig cfg;
    cfg.v_limit = sc.planner.v_limit;
    cfg.agent_radius = a.spec.radius_m;
    cfg.uncertainty_aware = sc.planner.uncertainty_aware;
    cfg.motion_uncertainty_terms = sc.planner.motion_uncertainty_terms;
    // without the motion-uncertainty terms the camera has no reason to move;
    // fall back to the classical policy of explicitly tracking known obstacles
    if (!cfg.motion_uncertainty_terms) cfg.alpha_tracking = 4.0;
    cfg.fov.opening_angle = fov_rad;
    cfg.camera_mount = mount;
    cfg.exec = ExecPolicy::serial();
    prob.config = cfg;

    const auto w0 = std::chrono::steady_clock::now();
    const PlanOutcome out = solve(prob);
    const auto w1 = std::chrono::steady_clock::now();
    solve_wall_ms.push_back(std::chrono::duration<double, std::milli>(w1 - w0).count());

    if (!out.feasible()) {
      log({{"kind", "plan_infeasible"}, {"t", t}, {"agent", i}, {"reason", out.infeasible_reason}});
      push({t + 0.4, 0, 0, i, EventKind::Replan, {}});
      return;
    }
    const SplineTrajectory& cand = out.solution->trajectory;
    if (!check(cand, a.spec.radius_m, a.protocol->store(), a.protocol->config())) {
      log({{"kind", "plan_blocked"}, {"t", t}, {"agent", i}});
      push({t + 0.3 + 0.2 * u01(), 0, 0, i, EventKind::Replan, {}});
      return;
    }
    const TrajectoryMessage msg = a.protocol->begin_publication(cand, t);
    broadcast(i, msg, t);
    log({{"kind", "optimistic"},
         {"t", t},
         {"agent", i},
         {"sequence", msg.sequence},
         {"t_in", cand.t_in()},
         {"t_f", cand.t_f()}});
    push({a.protocol->deadline(), 0, 0, i, EventKind::FinishPub, {}});
  }

  void on_finish_publication(int i, double t) {
    auto& a = agents[static_cast<std::size_t>(i)];
    const auto outcome = a.protocol->finish_publication(t, u01());
    broadcast(i, outcome.broadcast, t);
    if (outcome.committed) {
      a.segments.push_back(a.protocol->committed_trajectory());
      log({{"kind", "commit"},
           {"t", t},
           {"agent", i},
           {"sequence", outcome.broadcast.sequence},
           {"t_in", a.segments.back().t_in()},
           {"t_f", a.segments.back().t_f()}});
      push({t + sc.planner.replan_period_s, 0, 0, i, EventKind::Replan, {}});
    } else {
      log({{"kind", "veto"}, {"t", t}, {"agent", i}, {"retry_after", outcome.retry_after}});
      push({t + outcome.retry_after, 0, 0, i, EventKind::Replan, {}});
    }
  }

  void on_delivery(int i, double t, const Event& e) {
    auto& a = agents[static_cast<std::size_t>(i)];
    if (std::holds_alternative<TrajectoryMessage>(e.payload)) {
      if (!a.protocol) return;
      TrajectoryMessage msg = std::get<TrajectoryMessage>(e.payload);
      const auto est = a.estimates.find(msg.sender);
      if (est != a.estimates.end()) {
        msg.trajectory = apply_alignment(msg.trajectory, est->second);
        a.protocol->ingest(msg, t);
      } else if (sc.alignment_enabled) {
        // frames are not registered yet; storing the trajectory untransformed
        // would plant it in the wrong frame, so hold it until the first
        // successful registration against this peer
        a.held_msgs[msg.sender].push_back(std::move(msg));
      } else {
        a.protocol->ingest(msg, t);
      }
    } else if (std::holds_alternative<MapPacket>(e.payload)) {
      const auto& pk = std::get<MapPacket>(e.payload);
      a.peer_maps[pk.sender] = pk.map;
    }
  }

  // -- setup ------------------------------------------------------------------

  void init() {
    generate_landmarks();
    const int n = static_cast<int>(sc.agents.size());
    agents.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& a = agents[static_cast<std::size_t>(i)];
      a.spec = sc.agents[static_cast<std::size_t>(i)];
      a.map.owner = i;
      a.detector.mount = mount;
      a.detector.intrinsics = intrinsics;
      a.detector.fov_angle = fov_rad;
      a.detector.pixel_sigma = sc.sensing.pixel_sigma;
      a.detector.detection_probability = sc.sensing.detection_probability;
      if (a.spec.mode == TrajectoryMode::Planner) {
        const Pose2 bel0 = inject_drift(
            Pose2(a.spec.start.x, a.spec.start.y, to_rad(a.spec.start.yaw_deg)),
            a.spec.drift, 0.0);
        const SplineTrajectory hover = SplineTrajectory::constant(
            Vec3(bel0.x, bel0.y, a.spec.start.z), bel0.yaw, 0.0, sc.duration_s + 60.0);
        ProtocolConfig pcfg;
        pcfg.delay_check_duration = sc.delay_check_s;
        pcfg.agent_radius = a.spec.radius_m;
        a.protocol.emplace(i, pcfg, hover);
        a.segments.push_back(hover);
      }
    }
    // initial hover commitments, then the recurring event seeds
    for (int i = 0; i < n; ++i) {
      auto& a = agents[static_cast<std::size_t>(i)];
      if (a.protocol)
        broadcast(i, a.protocol->initial_commit_message(a.spec.clock_offset_s),
                  a.spec.clock_offset_s);
    }
    for (int i = 0; i < n; ++i) {
      const auto& a = agents[static_cast<std::size_t>(i)];
      if (!world.empty() && a.spec.clock_offset_s <= sc.duration_s)
        push({a.spec.clock_offset_s, 0, 0, i, EventKind::DetectorFrame, {}});
    }
    if (sc.alignment_enabled && n >= 2 && !world.empty()) {
      for (int i = 0; i < n; ++i) {
        const auto& a = agents[static_cast<std::size_t>(i)];
        const double first = sc.alignment_epoch_s + a.spec.clock_offset_s;
        if (first <= sc.duration_s) push({first, 0, 0, i, EventKind::AlignEpoch, {}});
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& a = agents[static_cast<std::size_t>(i)];
      if (a.protocol) {
        const double first = sc.planner.plan_start_s + 0.15 * i + a.spec.clock_offset_s;
        push({first, 0, 0, i, EventKind::Replan, {}});
      }
    }
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::Delivery: on_delivery(e.agent, e.t, e); break;
      case EventKind::DetectorFrame: on_detector(e.agent, e.t); break;
      case EventKind::AlignEpoch: on_align_epoch(e.agent, e.t); break;
      case EventKind::Replan: on_replan(e.agent, e.t); break;
      case EventKind::FinishPub: on_finish_publication(e.agent, e.t); break;
    }
  }

  // -- metrics ----------------------------------------------------------------

  double arrival_time(int i) const {
    const auto& a = agents[static_cast<std::size_t>(i)];
    const Vec3 goal(a.spec.goal.x, a.spec.goal.y, a.spec.goal.z);
    for (double t = sc.planner.plan_start_s; t <= sc.duration_s; t += 0.02) {
      if ((believed_state(i, t).position - goal).norm() <= sc.planner.goal_tolerance_m)
        return t;
    }
    return -1.0;
  }

  struct FovAccum {
    double known_rate = 0.0, known_cont = 0.0;
    double unknown_rate = 0.0, unknown_cont = 0.0;
  };

  FovAccum fov_window(int i, double w0, double w1) const {
    FovAccum out;
    const double dt = 0.05;
    if (w1 - w0 < dt) return out;
    const int M = static_cast<int>(std::floor((w1 - w0) / dt)) + 1;
    std::vector<Vec3> tp(static_cast<std::size_t>(M));
    std::vector<Pose3> cam(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
      const double t = w0 + k * dt;
      const BelievedState b = believed_state(i, t);
      const Pose2 tr = true_pose2(i, t, b);
      tp[static_cast<std::size_t>(k)] = Vec3(tr.x, tr.y, b.position.z());
      cam[static_cast<std::size_t>(k)] =
          compose(pose3_from_planar(tp[static_cast<std::size_t>(k)], tr.yaw), mount);
    }
    int known_hits = 0, unknown_hits = 0, known_run = 0, unknown_run = 0;
    int known_best = 0, unknown_best = 0;
    for (int k = 0; k < M; ++k) {
      const double t = w0 + k * dt;
      const Pose3 inv_cam = inverse(cam[static_cast<std::size_t>(k)]);
      bool known = false;
      for (const auto& o : sc.obstacles) {
        if (fov_score(apply(inv_cam, obstacle_true_position(o, t)), fov_rad) > 0.0) {
          known = true;
          break;
        }
      }
      bool unknown = true;  // no forward motion left counts as covered
      for (int l = k + 1; l < M; ++l) {
        const Vec3 d = tp[static_cast<std::size_t>(l)] - tp[static_cast<std::size_t>(k)];
        if (d.norm() >= 0.01) {
          unknown = fov_score(apply(inv_cam, tp[static_cast<std::size_t>(l)]), fov_rad) > 0.0;
          break;
        }
      }
      known_hits += known ? 1 : 0;
      unknown_hits += unknown ? 1 : 0;
      known_run = known ? known_run + 1 : 0;
      unknown_run = unknown ? unknown_run + 1 : 0;
      known_best = std::max(known_best, known_run);
      unknown_best = std::max(unknown_best, unknown_run);
    }
    out.known_rate = 100.0 * known_hits / M;
    out.unknown_rate = 100.0 * unknown_hits / M;
    out.known_cont = known_best * dt;
    out.unknown_cont = unknown_best * dt;
    return out;
  }

  Metrics collect_metrics() {
    Metrics m;
    const int n = static_cast<int>(agents.size());

    std::vector<std::function<Vec3(double)>> bodies;
    std::vector<double> radii;
    for (int i = 0; i < n; ++i) {
      bodies.push_back([this, i](double t) { return true_position(i, t); });
      radii.push_back(agents[static_cast<std::size_t>(i)].spec.radius_m);
    }
    for (const auto& o : sc.obstacles) {
      bodies.push_back([this, o](double t) { return obstacle_true_position(o, t); });
      radii.push_back(o.radius_m);
    }
    const std::vector<CollisionEvent> hits =
        collision_event_list(bodies, radii, n, 0.0, sc.duration_s, 0.02);
    m.collisions = static_cast<int>(hits.size());
    for (const CollisionEvent& c : hits)
      log({{"kind", "collision"}, {"t", c.t}, {"a", c.a}, {"b", c.b}});

    double travel_sum = 0.0;
    int planner_count = 0;
    FovAccum fov_sum;
    for (int i = 0; i < n; ++i) {
      const auto& a = agents[static_cast<std::size_t>(i)];
      double w0 = 0.0, w1 = sc.duration_s;
      if (a.spec.mode == TrajectoryMode::Planner) {
        ++planner_count;
        w0 = a.segments.size() > 1 ? a.segments[1].t_in() : sc.planner.plan_start_s;
        const double arr = arrival_time(i);
        w1 = arr > 0.0 ? arr : sc.duration_s;
        travel_sum += (arr > 0.0 ? arr : sc.duration_s) - sc.planner.plan_start_s;
        w0 = std::min(w0, w1);
      }
      const FovAccum f = fov_window(i, w0, w1);
      fov_sum.known_rate += f.known_rate;
      fov_sum.known_cont += f.known_cont;
      fov_sum.unknown_rate += f.unknown_rate;
      fov_sum.unknown_cont += f.unknown_cont;
    }
    m.travel_time_s = planner_count > 0 ? travel_sum / planner_count : sc.duration_s;
    m.known_fov_rate_pct = fov_sum.known_rate / n;
    m.known_fov_continuous_s = fov_sum.known_cont / n;
    m.unknown_fov_rate_pct = fov_sum.unknown_rate / n;
    m.unknown_fov_continuous_s = fov_sum.unknown_cont / n;

    if (agents.size() >= 2 && !est_series.empty()) {
      const AlignmentErrorStats st = alignment_error_stats(
          est_series, agents[0].spec.drift, agents[1].spec.drift);
      m.alignment_err_mean = st.mean;
      m.alignment_err_std = st.std_dev;
    }
    if (!solve_wall_ms.empty()) {
      double s = 0.0;
      for (double v : solve_wall_ms) s += v;
      m.computation_time_ms = s / static_cast<double>(solve_wall_ms.size());
    }
    return m;
  }

  std::string series_csv() const {
    std::ostringstream os;
    os << "t,err_x_m,err_y_m,err_yaw_deg,est_x_m,est_y_m,est_yaw_deg\n";
    char buf[256];
    for (const auto& [t, est] : est_series) {
      const Pose2 truth = compose(drift_transform(agents[0].spec.drift, t),
                                  inverse(drift_transform(agents[1].spec.drift, t)));
      const Pose2 err = compose(est, inverse(truth));
      std::snprintf(buf, sizeof buf, "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t, err.x,
                    err.y, to_deg(err.yaw), est.x, est.y, to_deg(est.yaw));
      os << buf;
    }
    return os.str();
  }
};

std::string drift_kind_label(DriftKind k) {
  switch (k) {
    case DriftKind::None: return "None";
    case DriftKind::ConstantBias: return "Const.";
    case DriftKind::LinearDrift: return "Linear";
  }
  return "?";
}

std::string drift_axes_label(const DriftSpec& d) {
  const Vec3 mag = d.bias.cwiseAbs() + d.rate.cwiseAbs();
  const bool trans = mag.x() > 0.0 || mag.y() > 0.0;
  const bool yaw = mag.z() > 0.0;
  if (trans && yaw) return "Both";
  if (trans) return "Translation";
  if (yaw) return "Yaw";
  return "None";
}

std::string traj_label_of(TrajectoryMode m) {
  switch (m) {
    case TrajectoryMode::Circle: return "Circle";
    case TrajectoryMode::PositionExchange: return "POC";
    case TrajectoryMode::Planner: return "Planner";
  }
  return "?";
}

}  // namespace

RunOutputs run(const Scenario& scenario) {
  scenario.validate();
  Sim sim(scenario);
  sim.log({{"kind", "run_start"},
           {"t", 0.0},
           {"name", scenario.name},
           {"seed", scenario.seed}});
  sim.init();
  while (!sim.queue.empty()) {
    const Event e = sim.queue.top();
    sim.queue.pop();
    sim.dispatch(e);
  }

  RunOutputs out;
  out.metrics = sim.collect_metrics();
  sim.log({{"kind", "run_end"},
           {"t", scenario.duration_s},
           {"collisions", out.metrics.collisions}});
  // post-run analysis events (collisions) are stamped mid-run; restore
  // timestamp order without disturbing same-stamp execution order
  std::stable_sort(sim.events_log.begin(), sim.events_log.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  out.events.reserve(sim.events_log.size());
  for (auto& [stamp, line] : sim.events_log) out.events.push_back(std::move(line));
  out.alignment_series_csv = sim.series_csv();
  out.solve_wall_ms = std::move(sim.solve_wall_ms);

  const auto& a0 = scenario.agents.front();
  out.metrics_csv = metrics_csv_header() + "\n" +
                    metrics_csv_row(scenario.name, traj_label_of(a0.mode),
                                    drift_kind_label(a0.drift.kind),
                                    drift_axes_label(a0.drift), out.metrics) +
                    "\n";
  return out;
}

std::string metrics_csv_header() {
  return "case,traj,drift_kind,drift_axes,x_err_mean_m,x_err_std_m,y_err_mean_m,"
         "y_err_std_m,yaw_err_mean_deg,yaw_err_std_deg,collisions,travel_time_s,"
         "known_fov_rate_pct,known_fov_conti_s,unknown_fov_rate_pct,unknown_fov_conti_s";
}

std::string metrics_csv_row(const std::string& case_label, const std::string& traj_label,
                            const std::string& drift_label, const std::string& axes_label,
                            const Metrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s,%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%.6f,%.6f,%.6f,%.6f,%.6f",
                case_label.c_str(), traj_label.c_str(), drift_label.c_str(),
                axes_label.c_str(), m.alignment_err_mean.x(), m.alignment_err_std.x(),
                m.alignment_err_mean.y(), m.alignment_err_std.y(),
                m.alignment_err_mean.z(), m.alignment_err_std.z(), m.collisions,
                m.travel_time_s, m.known_fov_rate_pct, m.known_fov_continuous_s,
                m.unknown_fov_rate_pct, m.unknown_fov_continuous_s);
  return buf;
}

void write_outputs(const RunOutputs& outputs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "plotdata");
  {
    std::ofstream f(fs::path(out_dir) / "metrics.csv");
    if (!f) throw std::runtime_error("write_outputs: cannot write metrics.csv");
    f << outputs.metrics_csv;
  }
  {
    std::ofstream f(fs::path(out_dir) / "events.jsonl");
    for (const auto& line : outputs.events) f << line << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "plotdata" / "alignment_errors.csv");
    f << outputs.alignment_series_csv;
  }
  {
    std::ofstream f(fs::path(out_dir) / "timings.txt");
    double s = 0.0;
    for (double v : outputs.solve_wall_ms) s += v;
    f << "solves " << outputs.solve_wall_ms.size() << "\n";
    if (!outputs.solve_wall_ms.empty()) {
      f << "mean_ms " << s / static_cast<double>(outputs.solve_wall_ms.size()) << "\n";
      for (double v : outputs.solve_wall_ms) f << v << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// protocol stress

namespace {

struct StressEvent {
  double t = 0.0;
  int priority = 0;
  long seq = 0;
  int agent = 0;
  int kind = 0;  // 0 delivery, 1 propose, 2 finish
  TrajectoryMessage msg;
};

struct StressAfter {
  bool operator()(const StressEvent& a, const StressEvent& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.seq > b.seq;
  }
};

}  // namespace

StressResult run_deconfliction_stress(const StressConfig& cfg) {
  if (cfg.agents < 2) throw std::invalid_argument("stress: need at least two agents");
  if (cfg.delay_max_s < cfg.delay_min_s || cfg.delay_min_s < 0.0)
    throw std::invalid_argument("stress: bad delay range");
  if (cfg.delay_check_s < cfg.delay_max_s)
    throw std::invalid_argument("stress: delay check must cover the worst delay");

  std::mt19937_64 rng(cfg.seed);
  ProtocolConfig pcfg;
  pcfg.delay_check_duration = cfg.delay_check_s;
  pcfg.agent_radius = cfg.agent_radius_m;

  struct Commit {
    double stamp = 0.0;
    SplineTrajectory traj;
  };
  const int n = cfg.agents;
  std::vector<ProtocolAgent> agents;
  std::vector<std::vector<Commit>> commits(static_cast<std::size_t>(n));
  agents.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    const Vec3 p(cfg.arena_radius_m * std::cos(th), cfg.arena_radius_m * std::sin(th), 1.0);
    SplineTrajectory hover = SplineTrajectory::constant(p, 0.0, 0.0, cfg.duration_s + 10.0);
    agents.emplace_back(k, pcfg, hover);
    commits[static_cast<std::size_t>(k)].push_back({0.0, hover});
  }

  std::priority_queue<StressEvent, std::vector<StressEvent>, StressAfter> queue;
  long seq = 0;
  auto push = [&](StressEvent e) {
    e.priority = e.kind == 0 ? 0 : (e.kind == 1 ? 1 : 2);
    e.seq = seq++;
    queue.push(std::move(e));
  };
  auto delay = [&] {
    return std::uniform_real_distribution<double>(cfg.delay_min_s, cfg.delay_max_s)(rng);
  };
  auto u01 = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  auto broadcast = [&](int from, const TrajectoryMessage& msg, double now) {
    for (int j = 0; j < n; ++j) {
      if (j == from) continue;
      push({now + delay(), 0, 0, j, 0, msg});
    }
  };

  for (int k = 0; k < n; ++k)
    broadcast(k, agents[static_cast<std::size_t>(k)].initial_commit_message(0.0), 0.0);
  for (int k = 0; k < n; ++k) push({0.5 + 0.1 * k, 0, 0, k, 1, {}});

  StressResult result;
  while (!queue.empty()) {
    const StressEvent e = queue.top();
    queue.pop();
    auto& ag = agents[static_cast<std::size_t>(e.agent)];
    if (e.kind == 0) {
      ag.ingest(e.msg, e.t);
    } else if (e.kind == 1) {
      if (e.t > cfg.duration_s) continue;
      if (ag.waiting()) {
        push({e.t + 0.25, 0, 0, e.agent, 1, {}});
        continue;
      }
      const SplineTrajectory& com = ag.committed_trajectory();
      const double t_in = e.t + cfg.delay_check_s + 0.1;
      const Vec3 p0 = com.evaluate(std::clamp(t_in, com.t_in(), com.t_f())).position;
      const double ang = 2.0 * kPi * u01();
      const double rad = cfg.arena_radius_m * std::sqrt(u01());
      Vec3 target(rad * std::cos(ang), rad * std::sin(ang), 1.0 + 0.6 * (u01() - 0.5));
      if ((target - p0).norm() < 0.3) target.x() += 1.0;
      const double speed = 0.8 + 0.8 * u01();
      const double dur = std::clamp((target - p0).norm() / speed, 1.5, 6.0);
      std::vector<Vec3> cps(8);
      cps[0] = cps[1] = p0;
      cps[6] = cps[7] = target;
      const double fr[4] = {0.25, 0.45, 0.65, 0.85};
      for (int l = 0; l < 4; ++l) {
        Vec3 q = p0 + fr[l] * (target - p0);
        q.x() += 0.7 * (u01() - 0.5);
        q.y() += 0.7 * (u01() - 0.5);
        q.z() += 0.3 * (u01() - 0.5);
        cps[static_cast<std::size_t>(l) + 2] = q;
      }
      const SplineTrajectory cand(cps, std::vector<double>(7, 0.0), t_in, t_in + dur);
      if (!check(cand, cfg.agent_radius_m, ag.store(), pcfg)) {
        push({e.t + 0.2 + 0.3 * u01(), 0, 0, e.agent, 1, {}});
        continue;
      }
      broadcast(e.agent, ag.begin_publication(cand, e.t), e.t);
      push({ag.deadline(), 0, 0, e.agent, 2, {}});
    } else {
      const auto outcome = ag.finish_publication(e.t, u01());
      broadcast(e.agent, outcome.broadcast, e.t);
      if (outcome.committed) {
        ++result.commits;
        commits[static_cast<std::size_t>(e.agent)].push_back({e.t, ag.committed_trajectory()});
        push({e.t + 0.3 + 0.6 * u01(), 0, 0, e.agent, 1, {}});
      } else {
        ++result.vetoes;
        push({e.t + outcome.retry_after, 0, 0, e.agent, 1, {}});
      }
    }
  }

  // Oracle: the safety invariant rendered instant by instant. At each sample
  // the latest commitment of each agent is the live one; a pair is checked
  // when both domains contain the instant.
  const double dt = 0.01;
  const double t_end = cfg.duration_s + 5.0;
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<char>> pair_bad(static_cast<std::size_t>(n),
                                          std::vector<char>(static_cast<std::size_t>(n), 0));
  for (double t = 0.0; t <= t_end; t += dt) {
    std::vector<const SplineTrajectory*> live(static_cast<std::size_t>(n), nullptr);
    for (int k = 0; k < n; ++k) {
      auto& cur = cursor[static_cast<std::size_t>(k)];
      const auto& log = commits[static_cast<std::size_t>(k)];
      while (cur + 1 < log.size() && log[cur + 1].stamp <= t) ++cur;
      const SplineTrajectory& traj = log[cur].traj;
      if (t >= traj.t_in() && t <= traj.t_f()) live[static_cast<std::size_t>(k)] = &traj;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto* a = live[static_cast<std::size_t>(i)];
        const auto* b = live[static_cast<std::size_t>(j)];
        if (!a || !b) continue;
        if ((a->evaluate(t).position - b->evaluate(t).position).norm() <=
            2.0 * cfg.agent_radius_m)
          pair_bad[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      result.conflicts += pair_bad[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return result;
}

}  // namespace swarm
