#include "swarm/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace swarm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Pose3 camera_at(const SplineTrajectory& traj, double t, const Pose3& mount) {
  const double tc = std::clamp(t, traj.t_in(), traj.t_f());
  const auto s = traj.evaluate(tc);
  return compose(pose3_from_planar(s.position, s.yaw), mount);
}

// Constant-acceleration mean, evaluated in closed form.
Vec3 belief_mean_at(const ObstacleBelief& belief, double tau) {
  return belief.position() + tau * belief.velocity() +
         0.5 * tau * tau * belief.mean.tail<3>();
}

Vec3 effective_velocity_bound(const Mat3& P_pos, const Vec3& v_limit) {
  Vec3 out = v_limit;
  for (int k = 0; k < 3; ++k) {
    const double d = P_pos(k, k);
    if (d > 1e-12) out[k] = std::min(v_limit[k], v_limit[k] / std::sqrt(d));
  }
  return out;
}

// Direction of the shortest vector between the convex hulls of two point
// sets (Frank-Wolfe on the Minkowski difference). Near-zero means overlap.
Vec3 closest_difference(const std::vector<Vec3>& obstacle,
                        const std::vector<Vec3>& ego) {
  Vec3 x = obstacle.front() - ego.front();
  for (int it = 0; it < 96; ++it) {
    // support point minimizing x . (a - b)
    double best_a = std::numeric_limits<double>::infinity();
    double best_b = -std::numeric_limits<double>::infinity();
    Vec3 pa = obstacle.front(), pb = ego.front();
    for (const auto& a : obstacle) {
      const double v = x.dot(a);
      if (v < best_a) {
        best_a = v;
        pa = a;
      }
    }
    for (const auto& b : ego) {
      const double v = x.dot(b);
      if (v > best_b) {
        best_b = v;
        pb = b;
      }
    }
    const Vec3 s = pa - pb;
    const double gap = x.dot(x - s);
    if (gap <= 1e-14) break;
    const double denom = (x - s).squaredNorm();
    if (denom <= 1e-18) break;
    const double gamma = std::clamp(gap / denom, 0.0, 1.0);
    x = Vec3(x + gamma * (s - x));
  }
  return x;
}

struct HullPair {
  std::vector<Vec3> ego;
  std::vector<Vec3> obstacle;  // already inflated
};

std::vector<Vec3> peer_sample_points(const PeerTrajectory& peer, double ts, double te) {
  std::vector<Vec3> pts;
  for (int k = 0; k < 4; ++k) {
    const double t = ts + (te - ts) * k / 3.0;
    const double tc = std::clamp(t, peer.trajectory.t_in(), peer.trajectory.t_f());
    pts.push_back(peer.trajectory.evaluate(tc).position);
  }
  return pts;
}

// Hulls entering the separating-plane constraint for combined obstacle index
// `oi` (problem.obstacles then problem.peers) over spline interval j.
HullPair plane_hulls(const SplineTrajectory& traj, const PlanningProblem& problem,
                     const UncertaintyContext& ctx, int oi, int j) {
  const auto& cfg = problem.config;
  HullPair h;
  h.ego = traj.interval_hull(j);
  const int n_obs = static_cast<int>(problem.obstacles.size());
  if (oi < n_obs) {
    // means at interval start, midpoint, end from the half-boundary grid
    std::vector<Vec3> means = {ctx.obstacle_mean[oi][2 * j],
                               ctx.obstacle_mean[oi][2 * j + 1],
                               ctx.obstacle_mean[oi][2 * j + 2]};
    h.obstacle = inflate_obstacle(means, ctx.obstacle_cov[oi][j],
                                  cfg.agent_radius + problem.obstacles[oi].radius,
                                  cfg.confidence_level);
  } else {
    const auto& peer = problem.peers[oi - n_obs];
    const auto pts =
        peer_sample_points(peer, traj.interval_start(j), traj.interval_end(j));
    h.obstacle = inflate_obstacle(pts, Mat3::Zero(),
                                  cfg.agent_radius + peer.radius, cfg.confidence_level);
  }
  return h;
}

SeparatingPlane fit_plane(const HullPair& h, int oi, int j) {
  SeparatingPlane plane;
  plane.obstacle = oi;
  plane.interval = j;
  Vec3 dir = closest_difference(h.obstacle, h.ego);
  if (dir.norm() < 1e-9) {
    Vec3 co = Vec3::Zero(), ce = Vec3::Zero();
    for (const auto& p : h.obstacle) co += p;
    for (const auto& p : h.ego) ce += p;
    co /= static_cast<double>(h.obstacle.size());
    ce /= static_cast<double>(h.ego.size());
    dir = co - ce;
    if (dir.norm() < 1e-9) dir = Vec3::UnitX();
  }
  plane.normal = dir.normalized();
  double lo_obs = std::numeric_limits<double>::infinity();
  double hi_ego = -std::numeric_limits<double>::infinity();
  for (const auto& p : h.obstacle) lo_obs = std::min(lo_obs, plane.normal.dot(p));
  for (const auto& p : h.ego) hi_ego = std::max(hi_ego, plane.normal.dot(p));
  plane.offset = -0.5 * (lo_obs + hi_ego);
  return plane;
}

std::vector<SeparatingPlane> fit_planes(const SplineTrajectory& traj,
                                        const PlanningProblem& problem,
                                        const UncertaintyContext& ctx) {
  const int total =
      static_cast<int>(problem.obstacles.size() + problem.peers.size());
  std::vector<SeparatingPlane> planes;
  planes.reserve(static_cast<std::size_t>(total) * traj.num_intervals());
  for (int oi = 0; oi < total; ++oi)
    for (int j = 0; j < traj.num_intervals(); ++j)
      planes.push_back(fit_plane(plane_hulls(traj, problem, ctx, oi, j), oi, j));
  return planes;
}

// The shift makes the penalty optimum sit strictly inside the feasible set,
// absorbing the O(1/mu) slack a quadratic penalty leaves on active bounds.
constexpr double kPenaltyShift = 1e-3;

double penalty_value(const ConstraintResiduals& r, double mu) {
  double acc = 0.0;
  const auto add = [&](const Eigen::VectorXd& g) {
    for (int i = 0; i < g.size(); ++i) {
      const double v = std::max(0.0, g[i] + kPenaltyShift);
      acc += v * v;
    }
  };
  add(r.planes);
  add(r.velocity);
  add(r.acceleration);
  add(r.jerk);
  add(r.yaw);
  return mu * acc;
}

struct StartResult {
  bool feasible = false;
  double cost_total = std::numeric_limits<double>::infinity();
  DecisionVars vars;
  CostBreakdown breakdown;
  double worst_violation = std::numeric_limits<double>::infinity();
  std::string note;
};

}  // namespace

void PlannerConfig::validate() const {
  require(alpha_jerk >= 0 && alpha_yaw_accel >= 0 && alpha_time >= 0 &&
              alpha_goal_pos >= 0 && alpha_goal_yaw >= 0 && alpha_tracking >= 0,
          "PlannerConfig: weights must be >= 0");
  require((v_limit.array() > 0).all() && (a_max.array() > 0).all() &&
              (j_max.array() > 0).all(),
          "PlannerConfig: limits must be > 0");
  require(yaw_rate_max > 0 && yaw_value_max > 0, "PlannerConfig: yaw bounds > 0");
  require(agent_radius >= 0, "PlannerConfig: agent_radius >= 0");
  require(intervals >= 3, "PlannerConfig: at least 3 intervals");
  require(samples >= 2, "PlannerConfig: at least 2 look-ahead samples");
  require(multi_start >= 1 && outer_iterations >= 1 && inner_iterations >= 1,
          "PlannerConfig: solver iteration counts must be >= 1");
  require(penalty_initial > 0 && penalty_growth >= 1,
          "PlannerConfig: penalty schedule invalid");
  require(feasibility_tol > 0 && plane_margin > 0,
          "PlannerConfig: tolerances must be > 0");
  require(confidence_level > 0 && confidence_level < 1,
          "PlannerConfig: confidence_level in (0,1)");
  require(horizon_min > 0 && horizon_max > horizon_min,
          "PlannerConfig: horizon bounds invalid");
  require((motion_p0.array() >= 0).all(), "PlannerConfig: motion_p0 >= 0");
  fov.validate();
}

int free_pos_size(int intervals) { return 3 * (intervals - 2); }
int free_yaw_size(int intervals) { return intervals - 1; }

SplineTrajectory decode(const DecisionVars& vars, const PlanningProblem& problem) {
  const int N = problem.config.intervals;
  require(vars.free_pos.size() == free_pos_size(N),
          "decode: free_pos size mismatch");
  require(vars.free_yaw.size() == free_yaw_size(N),
          "decode: free_yaw size mismatch");
  require(vars.horizon > 0, "decode: horizon must be > 0");

  const double delta = vars.horizon / N;
  const auto& ini = problem.initial;

  std::vector<Vec3> pos(static_cast<std::size_t>(N) + 3);
  pos[0] = ini.position;
  pos[1] = Vec3(pos[0] + ini.velocity * (delta / 3.0));
  const Vec3 d1 = Vec3(ini.velocity + ini.acceleration * (delta / 2.0));
  pos[2] = Vec3(pos[1] + d1 * (2.0 * delta / 3.0));
  for (int l = 3; l <= N - 1; ++l)
    pos[l] = vars.free_pos.segment<3>(3 * (l - 3));
  const Vec3 terminal = vars.free_pos.segment<3>(3 * (N - 3));
  pos[N] = terminal;
  pos[N + 1] = terminal;
  pos[N + 2] = terminal;

  std::vector<double> yaw(static_cast<std::size_t>(N) + 2);
  yaw[0] = ini.yaw;
  yaw[1] = ini.yaw + ini.yaw_rate * delta / 2.0;
  for (int l = 2; l <= N - 1; ++l) yaw[l] = vars.free_yaw[l - 2];
  yaw[N] = vars.free_yaw[N - 2];
  yaw[N + 1] = vars.free_yaw[N - 2];

  return SplineTrajectory(std::move(pos), std::move(yaw), problem.t_in,
                          problem.t_in + vars.horizon);
}

std::vector<Vec3> inflate_obstacle(const std::vector<Vec3>& hull, const Mat3& P_pos,
                                   double agent_radius, double level) {
  require(!hull.empty(), "inflate_obstacle: empty hull");
  Vec3 ext;
  const double q = chi_square_quantile(3, level);
  for (int k = 0; k < 3; ++k)
    ext[k] = std::sqrt(std::max(0.0, P_pos(k, k)) * q) + agent_radius;
  if (ext.norm() < 1e-15) return hull;
  std::vector<Vec3> out;
  out.reserve(hull.size() * 8);
  for (const auto& v : hull)
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1})
          out.push_back(Vec3(v + Vec3(sx * ext.x(), sy * ext.y(), sz * ext.z())));
  return out;
}

UncertaintyContext propagate_candidate(const SplineTrajectory& traj,
                                       const PlanningProblem& problem) {
  const auto& cfg = problem.config;
  const int N = cfg.intervals;
  require(traj.num_intervals() == N, "propagate_candidate: interval mismatch");
  const double horizon = traj.t_f() - traj.t_in();
  const double delta = horizon / N;

  UncertaintyContext ctx;
  ctx.obstacle_cov.resize(problem.obstacles.size());
  ctx.obstacle_mean.resize(problem.obstacles.size());

  for (std::size_t i = 0; i < problem.obstacles.size(); ++i) {
    const auto& obs = problem.obstacles[i];
    // means on the half-interval grid, closed form
    ctx.obstacle_mean[i].resize(2 * N + 1);
    for (int b = 0; b <= 2 * N; ++b)
      ctx.obstacle_mean[i][b] = belief_mean_at(obs.belief, b * delta / 2.0);

    ctx.obstacle_cov[i].assign(N, Mat3::Zero());
    if (!cfg.uncertainty_aware) continue;

    // Propagate with the obstacle's own model step (recovered from F), but
    // never finer than half an interval to bound the work per evaluation.
    double tau = obs.model.F(0, 3);
    LinearModel model = obs.model;
    if (!(tau > 0)) {
      tau = delta;
      model = LinearModel::constant_acceleration(tau);
    } else if (tau < delta / 2.0) {
      tau = delta / 2.0;
      model = LinearModel::constant_acceleration(tau);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(horizon / tau - 1e-9)));
    const auto chain =
        propagate_horizon(obs.belief, model, traj, tau, steps, cfg.camera_mount, cfg.fov);
    for (int j = 0; j < N; ++j) {
      const double te = (j + 1) * delta;
      int m = static_cast<int>(std::ceil(te / tau - 1e-9));
      m = std::clamp(m, 1, steps);
      ctx.obstacle_cov[i][j] = chain[m - 1].position_covariance();
    }
  }

  ctx.motion_cov.assign(N, Mat3::Zero());
  if (cfg.uncertainty_aware && cfg.motion_uncertainty_terms) {
    std::vector<Pose3> cameras;
    cameras.reserve(N);
    for (int k = 1; k <= N; ++k)
      cameras.push_back(camera_at(traj, traj.t_in() + k * delta, cfg.camera_mount));
    Mat9 P0 = Mat9::Zero();
    for (int b = 0; b < 3; ++b)
      P0.block<3, 3>(3 * b, 3 * b) = cfg.motion_p0[b] * Mat3::Identity();
    const auto chain = propagate_motion_uncertainty(
        cameras, traj.sample_uniform(cfg.samples), P0,
        LinearModel::constant_acceleration(delta), cfg.fov, traj.t_in(), delta);
    for (int j = 0; j < N; ++j) ctx.motion_cov[j] = chain[j].position_block();
  }
  return ctx;
}

CostBreakdown cost(const DecisionVars& vars, const PlanningProblem& problem) {
  const auto& cfg = problem.config;
  const SplineTrajectory traj = decode(vars, problem);

  // 3-node Gauss-Legendre per interval (exact for the piecewise-polynomial
  // integrands at these degrees)
  static const double nodes[3] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  static const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

  CostBreakdown c;
  for (int j = 0; j < traj.num_intervals(); ++j) {
    const double ts = traj.interval_start(j), te = traj.interval_end(j);
    const double half = 0.5 * (te - ts), mid = 0.5 * (te + ts);
    for (int k = 0; k < 3; ++k) {
      const auto s = traj.evaluate(mid + half * nodes[k]);
      c.jerk += weights[k] * half * s.jerk.squaredNorm();
      c.yaw_accel += weights[k] * half * s.yaw_accel * s.yaw_accel;
    }
  }
  c.jerk *= cfg.alpha_jerk;
  c.yaw_accel *= cfg.alpha_yaw_accel;
  c.time = cfg.alpha_time * traj.t_f();
  const auto end = traj.evaluate(traj.t_f());
  c.goal_pos = cfg.alpha_goal_pos * (end.position - problem.goal_position).squaredNorm();
  const double dyaw = angle_diff(end.yaw, problem.goal_yaw);
  c.goal_yaw = cfg.alpha_goal_yaw * dyaw * dyaw;
  if (cfg.alpha_tracking > 0.0 && !problem.obstacles.empty()) {
    // misalignment between the camera axis and the predicted obstacle
    // bearings, integrated along the trajectory
    for (int j = 0; j < traj.num_intervals(); ++j) {
      const double ts = traj.interval_start(j), te = traj.interval_end(j);
      const double half = 0.5 * (te - ts), mid = 0.5 * (te + ts);
      for (int k = 0; k < 3; ++k) {
        const double t = mid + half * nodes[k];
        const Pose3 camera = camera_at(traj, t, cfg.camera_mount);
        const Vec3 axis = camera.rotation * Vec3::UnitZ();
        double miss = 0.0;
        for (const auto& obs : problem.obstacles) {
          const Vec3 d = belief_mean_at(obs.belief, t - traj.t_in()) - camera.translation;
          const double norm = d.norm();
          if (norm > 1e-9) miss += 1.0 - axis.dot(d / norm);
        }
        c.tracking += weights[k] * half * miss /
                      static_cast<double>(problem.obstacles.size());
      }
    }
    c.tracking *= cfg.alpha_tracking;
  }
  c.total = c.jerk + c.yaw_accel + c.time + c.goal_pos + c.goal_yaw + c.tracking;
  return c;
}

ConstraintResiduals constraint_residuals(const DecisionVars& vars,
                                         const PlanningProblem& problem) {
  const SplineTrajectory traj = decode(vars, problem);
  return constraint_residuals(vars, problem, propagate_candidate(traj, problem));
}

ConstraintResiduals constraint_residuals(const DecisionVars& vars,
                                         const PlanningProblem& problem,
                                         const UncertaintyContext& ctx) {
  const auto& cfg = problem.config;
  const SplineTrajectory traj = decode(vars, problem);
  ConstraintResiduals r;

  const auto s0 = traj.evaluate(traj.t_in());
  r.initial_state.resize(5);
  r.initial_state << (s0.position - problem.initial.position).norm(),
      (s0.velocity - problem.initial.velocity).norm(),
      (s0.acceleration - problem.initial.acceleration).norm(),
      std::abs(angle_diff(s0.yaw, problem.initial.yaw)),
      std::abs(s0.yaw_rate - problem.initial.yaw_rate);

  const auto sT = traj.evaluate(traj.t_f());
  r.terminal.resize(3);
  r.terminal << sT.velocity.norm(), sT.acceleration.norm(), std::abs(sT.yaw_rate);

  std::vector<double> plane_res;
  for (const auto& plane : vars.planes) {
    const auto h = plane_hulls(traj, problem, ctx, plane.obstacle, plane.interval);
    for (const auto& q : h.ego)
      plane_res.push_back(plane.normal.dot(q) + plane.offset + cfg.plane_margin);
    for (const auto& q : h.obstacle)
      plane_res.push_back(-(plane.normal.dot(q) + plane.offset) + cfg.plane_margin);
  }
  r.planes.resize(static_cast<long>(plane_res.size()));
  for (std::size_t i = 0; i < plane_res.size(); ++i)
    r.planes[static_cast<long>(i)] = plane_res[i];

  const auto vel_sets = traj.velocity_control_points();
  std::vector<double> vel_res;
  for (int j = 0; j < traj.num_intervals(); ++j) {
    const Vec3 bound = cfg.uncertainty_aware
                           ? effective_velocity_bound(ctx.motion_cov[j], cfg.v_limit)
                           : cfg.v_limit;
    for (const auto& v : vel_sets[j])
      for (int k = 0; k < 3; ++k) vel_res.push_back(std::abs(v[k]) - bound[k]);
  }
  r.velocity.resize(static_cast<long>(vel_res.size()));
  for (std::size_t i = 0; i < vel_res.size(); ++i)
    r.velocity[static_cast<long>(i)] = vel_res[i];

  const auto acc = traj.acceleration_ctrl_flat();
  r.acceleration.resize(3 * static_cast<long>(acc.size()));
  for (std::size_t l = 0; l < acc.size(); ++l)
    for (int k = 0; k < 3; ++k)
      r.acceleration[3 * static_cast<long>(l) + k] = std::abs(acc[l][k]) - cfg.a_max[k];

  const auto jrk = traj.jerk_ctrl_flat();
  r.jerk.resize(3 * static_cast<long>(jrk.size()));
  for (std::size_t l = 0; l < jrk.size(); ++l)
    for (int k = 0; k < 3; ++k)
      r.jerk[3 * static_cast<long>(l) + k] = std::abs(jrk[l][k]) - cfg.j_max[k];

  std::vector<double> yaw_res;
  if (cfg.bound_yaw_rate)
    for (double w : traj.yaw_rate_ctrl_flat())
      yaw_res.push_back(std::abs(w) - cfg.yaw_rate_max);
  if (cfg.bound_yaw_value) {
    const auto& yc = traj.yaw_control_points();
    for (std::size_t l = 0; l + 1 < yc.size(); ++l)
      yaw_res.push_back(std::abs(yc[l]) - cfg.yaw_value_max);
  }
  r.yaw.resize(static_cast<long>(yaw_res.size()));
  for (std::size_t i = 0; i < yaw_res.size(); ++i)
    r.yaw[static_cast<long>(i)] = yaw_res[i];
  return r;
}

double ConstraintResiduals::max_equality() const {
  double m = 0.0;
  for (int i = 0; i < initial_state.size(); ++i) m = std::max(m, initial_state[i]);
  for (int i = 0; i < terminal.size(); ++i) m = std::max(m, terminal[i]);
  return m;
}

double ConstraintResiduals::max_inequality() const {
  double m = -std::numeric_limits<double>::infinity();
  const auto scan = [&](const Eigen::VectorXd& g) {
    for (int i = 0; i < g.size(); ++i) m = std::max(m, g[i]);
  };
  scan(planes);
  scan(velocity);
  scan(acceleration);
  scan(jerk);
  scan(yaw);
  return m;
}

namespace {

// ---- solver internals ----------------------------------------------------

Eigen::VectorXd pack(const DecisionVars& v) {
  Eigen::VectorXd x(v.free_pos.size() + v.free_yaw.size() + 1);
  x << v.free_pos, v.free_yaw, v.horizon;
  return x;
}

DecisionVars unpack(const Eigen::VectorXd& x, const DecisionVars& tmpl,
                    const PlannerConfig& cfg) {
  DecisionVars v = tmpl;
  v.free_pos = x.head(tmpl.free_pos.size());
  v.free_yaw = x.segment(tmpl.free_pos.size(), tmpl.free_yaw.size());
  v.horizon = std::clamp(x[x.size() - 1], cfg.horizon_min, cfg.horizon_max);
  return v;
}

// The plane variables admit exact block minimization: for any trajectory the
// best plane per (obstacle, interval) is refit in closed form, so the merit
// sees the true hull separation rather than a stale separator.
double merit(const DecisionVars& v, const PlanningProblem& problem, double mu) {
  const SplineTrajectory traj = decode(v, problem);
  const UncertaintyContext ctx = propagate_candidate(traj, problem);
  DecisionVars vv = v;
  vv.planes = fit_planes(traj, problem, ctx);
  return cost(vv, problem).total +
         penalty_value(constraint_residuals(vv, problem, ctx), mu);
}

// L-BFGS two-loop descent with backtracking line search.
DecisionVars inner_descent(DecisionVars vars, const PlanningProblem& problem,
                           double mu) {
  const auto& cfg = problem.config;
  const auto clamp_h = [&](Eigen::VectorXd& x) {
    x[x.size() - 1] = std::clamp(x[x.size() - 1], cfg.horizon_min, cfg.horizon_max);
  };
  const auto eval = [&](const Eigen::VectorXd& x) {
    return merit(unpack(x, vars, cfg), problem, mu);
  };
  const auto grad = [&](const Eigen::VectorXd& x, double fx) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      Eigen::VectorXd xp = x;
      xp[i] += h;
      Eigen::VectorXd xm = x;
      xm[i] -= h;
      g[i] = (eval(xp) - eval(xm)) / (2.0 * h);
    }
    (void)fx;
    return g;
  };

  Eigen::VectorXd x = pack(vars);
  clamp_h(x);
  double f = eval(x);
  Eigen::VectorXd g = grad(x, f);

  const int mem = 8;
  std::vector<Eigen::VectorXd> S, Y;
  std::vector<double> rho;

  for (int it = 0; it < cfg.inner_iterations; ++it) {
    if (g.norm() < 1e-9 * std::max(1.0, std::abs(f))) break;

    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho[static_cast<std::size_t>(i)] * S[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(i)];
    }
    double gamma = 1.0;
    if (!S.empty()) {
      const double yy = Y.back().squaredNorm();
      if (yy > 1e-18) gamma = S.back().dot(Y.back()) / yy;
    }
    q *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd dir = -q;
    double d0 = g.dot(dir);
    if (d0 > -1e-16) {  // not a descent direction: restart from steepest
      dir = -g;
      d0 = -g.squaredNorm();
      S.clear();
      Y.clear();
      rho.clear();
    }

    double t = 1.0;
    bool improved = false;
    Eigen::VectorXd xn;
    double fn = f;
    for (int ls = 0; ls < 30; ++ls) {
      xn = x + t * dir;
      clamp_h(xn);
      fn = eval(xn);
      if (fn <= f + 1e-4 * t * d0) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;

    const Eigen::VectorXd gn = grad(xn, fn);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > mem) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho.erase(rho.begin());
      }
    }
    x = xn;
    f = fn;
    g = gn;
  }
  return unpack(x, vars, cfg);
}

std::vector<double> greville_times(int degree, int intervals, double t_in, double t_f,
                                   int count) {
  const auto knots = clamped_uniform_knots(degree, intervals, t_in, t_f);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    double acc = 0.0;
    for (int m = 1; m <= degree; ++m) acc += knots[l + m];
    out[static_cast<std::size_t>(l)] = acc / degree;
  }
  return out;
}

// Seed yaw control points face along the seed path; values are unwrapped to
// stay continuous from the pinned initial yaw.
Eigen::VectorXd seed_yaw(const std::vector<Vec3>& pos, const PlanningProblem& problem) {
  const int N = problem.config.intervals;
  Eigen::VectorXd out(free_yaw_size(N));
  double prev = problem.initial.yaw;
  for (int l = 2; l <= N; ++l) {
    const int m = std::clamp(l, 1, N + 1);
    const Vec3 d = Vec3(pos[m + 1] - pos[m - 1]);
    double bearing = prev;
    if (d.head<2>().norm() > 1e-6) bearing = std::atan2(d.y(), d.x());
    while (bearing - prev > std::numbers::pi) bearing -= 2.0 * std::numbers::pi;
    while (bearing - prev < -std::numbers::pi) bearing += 2.0 * std::numbers::pi;
    if (l <= N - 1)
      out[l - 2] = bearing;
    else
      out[N - 2] = bearing;
    prev = bearing;
  }
  return out;
}

DecisionVars seed_vars(const PlanningProblem& problem, double horizon,
                       const Vec3& offset) {
  const auto& cfg = problem.config;
  const int N = cfg.intervals;
  const Vec3 p0 = problem.initial.position;
  Vec3 dir = Vec3(problem.goal_position - p0);
  const double dist = dir.norm();
  if (dist > 1e-9)
    dir /= dist;
  else
    dir = Vec3::UnitX();
  const double v_ref = 0.6 * cfg.v_limit.minCoeff();
  const Vec3 target = Vec3(p0 + dir * std::min(dist, 0.85 * v_ref * horizon));

  const double t_in = problem.t_in, t_f = t_in + horizon;
  const auto xi = greville_times(SplineTrajectory::kPosDegree, N, t_in, t_f, N + 3);
  std::vector<Vec3> pos(static_cast<std::size_t>(N) + 3);
  for (int l = 0; l < N + 3; ++l) {
    const double a = (xi[l] - t_in) / horizon;
    const double bump = std::sin(std::numbers::pi * std::clamp(a, 0.0, 1.0));
    pos[l] = Vec3(p0 + a * (target - p0) + bump * offset);
  }

  DecisionVars v;
  v.horizon = horizon;
  v.free_pos.resize(free_pos_size(N));
  for (int l = 3; l <= N - 1; ++l) v.free_pos.segment<3>(3 * (l - 3)) = pos[l];
  v.free_pos.segment<3>(3 * (N - 3)) = target;
  v.free_yaw = seed_yaw(pos, problem);
  return v;
}

DecisionVars seed_from_trajectory(const SplineTrajectory& warm,
                                  const PlanningProblem& problem, double horizon) {
  const int N = problem.config.intervals;
  const double t_in = problem.t_in, t_f = t_in + horizon;
  const auto xi = greville_times(SplineTrajectory::kPosDegree, N, t_in, t_f, N + 3);
  std::vector<Vec3> pos(static_cast<std::size_t>(N) + 3);
  for (int l = 0; l < N + 3; ++l) {
    const double tc = std::clamp(xi[l], warm.t_in(), warm.t_f());
    pos[l] = warm.evaluate(tc).position;
  }
  DecisionVars v;
  v.horizon = horizon;
  v.free_pos.resize(free_pos_size(N));
  for (int l = 3; l <= N - 1; ++l) v.free_pos.segment<3>(3 * (l - 3)) = pos[l];
  v.free_pos.segment<3>(3 * (N - 3)) = pos[static_cast<std::size_t>(N)];

  const auto xiy =
      greville_times(SplineTrajectory::kYawDegree, N, t_in, t_f, N + 2);
  v.free_yaw.resize(free_yaw_size(N));
  double prev = problem.initial.yaw;
  for (int l = 2; l <= N; ++l) {
    const double tc = std::clamp(xiy[std::min(l, N + 1)], warm.t_in(), warm.t_f());
    double y = warm.evaluate(tc).yaw;
    while (y - prev > std::numbers::pi) y -= 2.0 * std::numbers::pi;
    while (y - prev < -std::numbers::pi) y += 2.0 * std::numbers::pi;
    if (l <= N - 1)
      v.free_yaw[l - 2] = y;
    else
      v.free_yaw[N - 2] = y;
    prev = y;
  }
  return v;
}

StartResult run_start(DecisionVars vars, const PlanningProblem& problem) {
  const auto& cfg = problem.config;
  double mu = cfg.penalty_initial;
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    vars = inner_descent(std::move(vars), problem, mu);
    mu *= cfg.penalty_growth;
  }

  // polish: one pass with the penalty high enough to dwarf the cost, squeezing
  // the remaining constraint slack below the audit tolerance
  {
    const SplineTrajectory traj = decode(vars, problem);
    const UncertaintyContext ctx = propagate_candidate(traj, problem);
    vars.planes = fit_planes(traj, problem, ctx);
    const ConstraintResiduals r = constraint_residuals(vars, problem, ctx);
    if (r.max_inequality() > 0.25 * cfg.feasibility_tol)
      vars = inner_descent(std::move(vars), problem, 1e8);
  }

  // feasibility restoration: stretch time (which only relaxes kinodynamic
  // bounds) and refit planes until the residuals clear the tolerance
  StartResult out;
  static const double dilations[] = {1.0,  1.03, 1.08, 1.15, 1.25,
                                     1.4,  1.6,  1.9,  2.3,  3.0};
  for (double s : dilations) {
    DecisionVars cand = vars;
    cand.horizon = std::clamp(vars.horizon * s, cfg.horizon_min, cfg.horizon_max);
    const SplineTrajectory traj = decode(cand, problem);
    const UncertaintyContext ctx = propagate_candidate(traj, problem);
    cand.planes = fit_planes(traj, problem, ctx);
    const ConstraintResiduals r = constraint_residuals(cand, problem, ctx);
#ifdef SWARM_PLANNER_DEBUG
    const auto mx = [](const Eigen::VectorXd& g) {
      return g.size() ? g.maxCoeff() : -1.0;
    };
    std::fprintf(stderr,
                 "dilate %.2f T=%.3f planes %.3e vel %.3e acc %.3e jerk %.3e yaw "
                 "%.3e eq %.3e\n",
                 s, cand.horizon, mx(r.planes), mx(r.velocity), mx(r.acceleration),
                 mx(r.jerk), mx(r.yaw), r.max_equality());
#endif
    const double viol = std::max(r.max_inequality(), r.max_equality());
    if (viol < out.worst_violation) {
      out.worst_violation = viol;
      out.vars = cand;
    }
    if (r.max_inequality() <= 0.5 * cfg.feasibility_tol &&
        r.max_equality() <= cfg.feasibility_tol) {
      std::string why;
      if (audit_feasibility(traj, problem, &why)) {
        out.feasible = true;
        out.vars = cand;
        out.breakdown = cost(cand, problem);
        out.cost_total = out.breakdown.total;
        return out;
      }
      out.note = why;
    }
  }
  if (out.note.empty()) {
    std::ostringstream os;
    os << "residual violation " << out.worst_violation;
    out.note = os.str();
  }
  return out;
}

}  // namespace

PlanOutcome solve(const PlanningProblem& problem) {
  const auto& cfg = problem.config;
  cfg.validate();
  require(problem.goal_position.allFinite() && std::isfinite(problem.goal_yaw),
          "solve: goal must be finite");
  require(problem.t_in >= 0, "solve: t_in must be >= 0");

  const Vec3 p0 = problem.initial.position;
  Vec3 dir = Vec3(problem.goal_position - p0);
  const double dist = dir.norm();
  if (dist > 1e-9)
    dir /= dist;
  else
    dir = Vec3::UnitX();
  const double v_ref = 0.6 * cfg.v_limit.minCoeff();
  const double horizon0 =
      std::clamp(dist / v_ref + 1.0, cfg.horizon_min, cfg.horizon_max);

  Vec3 lateral = dir.cross(Vec3::UnitZ());
  if (lateral.norm() < 1e-6) lateral = Vec3::UnitY();
  lateral.normalize();
  const double mag = std::max(1.0, 0.3 * dist);

  std::vector<DecisionVars> seeds;
  if (problem.warm_start &&
      problem.warm_start->t_f() > problem.t_in + cfg.horizon_min) {
    const double h = std::clamp(problem.warm_start->t_f() - problem.t_in,
                                cfg.horizon_min, cfg.horizon_max);
    seeds.push_back(seed_from_trajectory(*problem.warm_start, problem, h));
  }
  seeds.push_back(seed_vars(problem, horizon0, Vec3::Zero()));
  seeds.push_back(seed_vars(problem, horizon0, Vec3(mag * lateral)));
  seeds.push_back(seed_vars(problem, horizon0, Vec3(-mag * lateral)));
  seeds.push_back(seed_vars(problem, horizon0, Vec3(0.7 * mag * Vec3::UnitZ())));
  if (static_cast<int>(seeds.size()) > cfg.multi_start)
    seeds.resize(static_cast<std::size_t>(cfg.multi_start));

  std::vector<StartResult> results(seeds.size());
  for_each_index(static_cast<int>(seeds.size()), cfg.exec,
                 [&](int i) { results[static_cast<std::size_t>(i)] =
                                  run_start(seeds[static_cast<std::size_t>(i)], problem); });

  int best = -1;
  for (int i = 0; i < static_cast<int>(results.size()); ++i) {
    if (!results[static_cast<std::size_t>(i)].feasible) continue;
    if (best < 0 || results[static_cast<std::size_t>(i)].cost_total <
                        results[static_cast<std::size_t>(best)].cost_total)
      best = i;
  }

  PlanOutcome outcome;
  if (best < 0) {
    double worst = std::numeric_limits<double>::infinity();
    std::string note = "no start converged";
    for (const auto& res : results)
      if (res.worst_violation < worst) {
        worst = res.worst_violation;
        note = res.note;
      }
    outcome.infeasible_reason = "no start passed the feasibility audit; " + note;
    return outcome;
  }

  const auto& win = results[static_cast<std::size_t>(best)];
  PlannedSolution sln;
  sln.trajectory = decode(win.vars, problem);
  sln.planes = win.vars.planes;
  sln.cost = win.breakdown;
  sln.start_index = best;
  outcome.solution = std::move(sln);
  return outcome;
}

bool audit_feasibility(const SplineTrajectory& traj, const PlanningProblem& problem,
                       std::string* why) {
  const auto& cfg = problem.config;
  const double tol = cfg.feasibility_tol;
  const int M = 256;
  const double t0 = traj.t_in(), t1 = traj.t_f();
  const double span = t1 - t0;
  const int N = traj.num_intervals();
  const double delta = span / N;

  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  // per-interval motion covariances, recomputed from scratch
  std::vector<Vec3> bounds(static_cast<std::size_t>(N), cfg.v_limit);
  if (cfg.uncertainty_aware && cfg.motion_uncertainty_terms) {
    std::vector<Pose3> cameras;
    for (int k = 1; k <= N; ++k)
      cameras.push_back(camera_at(traj, t0 + k * delta, cfg.camera_mount));
    Mat9 P0 = Mat9::Zero();
    for (int b = 0; b < 3; ++b)
      P0.block<3, 3>(3 * b, 3 * b) = cfg.motion_p0[b] * Mat3::Identity();
    const auto chain = propagate_motion_uncertainty(
        cameras, traj.sample_uniform(cfg.samples), P0,
        LinearModel::constant_acceleration(delta), cfg.fov, t0, delta);
    for (int j = 0; j < N; ++j) {
      const Mat3 P = chain[j].position_block();
      for (int k = 0; k < 3; ++k) {
        const double d = P(k, k);
        if (d > 1e-12)
          bounds[static_cast<std::size_t>(j)][k] =
              std::min(cfg.v_limit[k], cfg.v_limit[k] / std::sqrt(d));
      }
    }
  }

  // obstacle covariance chains along this trajectory
  const double q95 = chi_square_quantile(3, cfg.confidence_level);
  std::vector<std::vector<Mat3>> obs_cov(problem.obstacles.size());
  for (std::size_t i = 0; i < problem.obstacles.size(); ++i) {
    obs_cov[i].assign(static_cast<std::size_t>(N), Mat3::Zero());
    if (!cfg.uncertainty_aware) continue;
    const auto& obs = problem.obstacles[i];
    double tau = obs.model.F(0, 3);
    LinearModel model = obs.model;
    if (!(tau > 0) || tau < delta / 2.0) {
      tau = std::max(delta / 2.0, tau > 0 ? tau : delta);
      model = LinearModel::constant_acceleration(tau);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(span / tau - 1e-9)));
    const auto chain =
        propagate_horizon(obs.belief, model, traj, tau, steps, cfg.camera_mount, cfg.fov);
    for (int j = 0; j < N; ++j) {
      int m = static_cast<int>(std::ceil((j + 1) * delta / tau - 1e-9));
      m = std::clamp(m, 1, steps);
      obs_cov[i][static_cast<std::size_t>(j)] = chain[m - 1].position_covariance();
    }
  }

  const auto s_start = traj.evaluate(t0);
  if ((s_start.position - problem.initial.position).norm() > tol ||
      (s_start.velocity - problem.initial.velocity).norm() > tol ||
      (s_start.acceleration - problem.initial.acceleration).norm() > tol ||
      std::abs(angle_diff(s_start.yaw, problem.initial.yaw)) > tol ||
      std::abs(s_start.yaw_rate - problem.initial.yaw_rate) > tol)
    return fail("initial state mismatch");
  const auto s_end = traj.evaluate(t1);
  if (s_end.velocity.norm() > tol || s_end.acceleration.norm() > tol ||
      std::abs(s_end.yaw_rate) > tol)
    return fail("terminal rest violated");

  for (int m = 0; m < M; ++m) {
    const double t = t0 + span * m / (M - 1);
    const auto s = traj.evaluate(t);
    const int j = std::clamp(static_cast<int>((t - t0) / delta), 0, N - 1);

    for (int k = 0; k < 3; ++k) {
      if (std::abs(s.velocity[k]) > bounds[static_cast<std::size_t>(j)][k] + tol) {
        std::ostringstream os;
        os << "velocity bound exceeded at t=" << t << " axis " << k;
        return fail(os.str());
      }
      if (std::abs(s.acceleration[k]) > cfg.a_max[k] + tol)
        return fail("acceleration bound exceeded");
      if (std::abs(s.jerk[k]) > cfg.j_max[k] + tol)
        return fail("jerk bound exceeded");
    }
    if (cfg.bound_yaw_rate && std::abs(s.yaw_rate) > cfg.yaw_rate_max + tol)
      return fail("yaw rate bound exceeded");
    if (cfg.bound_yaw_value && std::abs(s.yaw) > cfg.yaw_value_max + tol)
      return fail("yaw bound exceeded");

    for (std::size_t i = 0; i < problem.obstacles.size(); ++i) {
      const auto& obs = problem.obstacles[i];
      const Vec3 center = belief_mean_at(obs.belief, t - t0);
      const Mat3& P = obs_cov[i][static_cast<std::size_t>(j)];
      bool outside = false;
      for (int k = 0; k < 3; ++k) {
        const double half = cfg.agent_radius + obs.radius +
                            std::sqrt(std::max(0.0, P(k, k)) * q95);
        if (std::abs(s.position[k] - center[k]) >= half - tol) outside = true;
      }
      if (!outside) {
        std::ostringstream os;
        os << "obstacle " << i << " clearance violated at t=" << t;
        return fail(os.str());
      }
    }
    for (std::size_t p = 0; p < problem.peers.size(); ++p) {
      const auto& peer = problem.peers[p];
      const double tc = std::clamp(t, peer.trajectory.t_in(), peer.trajectory.t_f());
      const Vec3 q = peer.trajectory.evaluate(tc).position;
      const double r_sum = cfg.agent_radius + peer.radius;
      if ((s.position - q).cwiseAbs().maxCoeff() < r_sum - tol) {
        std::ostringstream os;
        os << "peer " << p << " clearance violated at t=" << t;
        return fail(os.str());
      }
    }
  }
  return true;
}

FovMetrics fov_metrics(const SplineTrajectory& traj,
                       const std::vector<std::function<Vec3(double)>>& obstacles,
                       const FovModel& fov, double dt, const Pose3& camera_mount,
                       int ptraj_samples) {
  require(dt > 0, "fov_metrics: dt must be > 0");
  FovMetrics out;
  const double t0 = traj.t_in(), t1 = traj.t_f();
  // samples cover [t0, t1) so a full run spans exactly the flight duration
  const int M = std::max(1, static_cast<int>(std::floor((t1 - t0) / dt + 1e-9)));
  const auto p_traj = traj.sample_uniform(std::max(2, ptraj_samples));

  std::vector<int> known_runs(obstacles.size(), 0);
  std::vector<int> known_counts(obstacles.size(), 0);
  std::vector<int> known_best(obstacles.size(), 0);
  int unknown_count = 0, unknown_run = 0, unknown_best = 0;

  for (int m = 0; m < M; ++m) {
    const double t = t0 + m * dt;
    const Pose3 camera = camera_at(traj, t, camera_mount);
    const Pose3 cam_inv = inverse(camera);

    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const bool in =
          fov_score(apply(cam_inv, obstacles[i](t)), fov.opening_angle) > 0.0;
      if (in) {
        ++known_counts[i];
        ++known_runs[i];
        known_best[i] = std::max(known_best[i], known_runs[i]);
      } else {
        known_runs[i] = 0;
      }
    }

    // next look-ahead point not yet passed and not on top of the camera
    const TimedPoint* pick = nullptr;
    for (std::size_t i = 0; i < p_traj.size(); ++i) {
      if (p_traj[i].t < t && i + 1 < p_traj.size()) continue;
      if (apply(cam_inv, p_traj[i].p).norm() >= 1e-2) {
        pick = &p_traj[i];
        break;
      }
    }
    const bool in_unknown =
        pick == nullptr ||
        fov_score(apply(cam_inv, pick->p), fov.opening_angle) > 0.0;
    if (in_unknown) {
      ++unknown_count;
      ++unknown_run;
      unknown_best = std::max(unknown_best, unknown_run);
    } else {
      unknown_run = 0;
    }
  }

  if (!obstacles.empty()) {
    double rate = 0.0;
    int best = 0;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      rate += 100.0 * known_counts[i] / M;
      best = std::max(best, known_best[i]);
    }
    out.known_fov_rate = rate / static_cast<double>(obstacles.size());
    out.known_continuous = best * dt;
  }
  out.unknown_fov_rate = 100.0 * unknown_count / M;
  out.unknown_continuous = unknown_best * dt;
  return out;
}

}  // namespace swarm
