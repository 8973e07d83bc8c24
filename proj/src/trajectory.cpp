#include "swarm/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarm {

namespace {

// Knot span k with knots[k] <= t < knots[k+1], clamped to the valid range
// [degree, num_ctrl-1] so the endpoint evaluates inside the last span.
int find_span(int degree, int num_ctrl, const std::vector<double>& knots, double t) {
  if (t >= knots[num_ctrl]) return num_ctrl - 1;
  if (t <= knots[degree]) return degree;
  auto it = std::upper_bound(knots.begin() + degree, knots.begin() + num_ctrl + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

template <typename T>
T de_boor(int degree, const std::vector<T>& ctrl, const std::vector<double>& knots,
          double t) {
  const int n = static_cast<int>(ctrl.size());
  const int k = find_span(degree, n, knots, t);
  std::vector<T> d(ctrl.begin() + (k - degree), ctrl.begin() + (k + 1));
  for (int r = 1; r <= degree; ++r) {
    for (int j = degree; j >= r; --j) {
      const double den = knots[j + 1 + k - r] - knots[j + k - degree];
      const double alpha = (t - knots[j + k - degree]) / den;
      d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
    }
  }
  return d[degree];
}

template <typename T>
std::vector<T> derivative_ctrl(int degree, const std::vector<T>& ctrl,
                               const std::vector<double>& knots) {
  std::vector<T> out;
  out.reserve(ctrl.size() - 1);
  for (std::size_t i = 0; i + 1 < ctrl.size(); ++i) {
    const double den = knots[i + degree + 1] - knots[i + 1];
    out.push_back(static_cast<double>(degree) / den * (ctrl[i + 1] - ctrl[i]));
  }
  return out;
}

std::vector<double> interior_knots(const std::vector<double>& knots) {
  return std::vector<double>(knots.begin() + 1, knots.end() - 1);
}

}  // namespace

std::vector<double> clamped_uniform_knots(int degree, int intervals, double t_in,
                                          double t_f) {
  if (degree < 0 || intervals < 1)
    throw std::invalid_argument("clamped_uniform_knots: bad degree/intervals");
  if (!(t_f > t_in)) throw std::invalid_argument("clamped_uniform_knots: t_f <= t_in");
  std::vector<double> knots(intervals + 2 * degree + 1);
  const double dt = (t_f - t_in) / intervals;
  for (int i = 0; i < static_cast<int>(knots.size()); ++i) {
    const int seg = std::clamp(i - degree, 0, intervals);
    knots[i] = (seg == intervals) ? t_f : t_in + seg * dt;
  }
  return knots;
}

SplineTrajectory::SplineTrajectory(std::vector<Vec3> position_ctrl,
                                   std::vector<double> yaw_ctrl, double t_in,
                                   double t_f)
    : pos_ctrl_(std::move(position_ctrl)),
      yaw_ctrl_(std::move(yaw_ctrl)),
      t_in_(t_in),
      t_f_(t_f) {
  if (!(t_f_ > t_in_)) throw std::invalid_argument("SplineTrajectory: t_f <= t_in");
  const int n_pos = static_cast<int>(pos_ctrl_.size());
  if (n_pos < kPosDegree + 1)
    throw std::invalid_argument("SplineTrajectory: need at least 4 position control points");
  const int intervals = n_pos - kPosDegree;
  if (static_cast<int>(yaw_ctrl_.size()) != intervals + kYawDegree)
    throw std::invalid_argument(
        "SplineTrajectory: yaw control point count must be one less than position's");
  pos_knots_ = clamped_uniform_knots(kPosDegree, intervals, t_in_, t_f_);
  yaw_knots_ = clamped_uniform_knots(kYawDegree, intervals, t_in_, t_f_);
}

SplineTrajectory SplineTrajectory::constant(const Vec3& position, double yaw,
                                            double t_in, double t_f, int intervals) {
  std::vector<Vec3> p(intervals + kPosDegree, position);
  std::vector<double> y(intervals + kYawDegree, yaw);
  return SplineTrajectory(std::move(p), std::move(y), t_in, t_f);
}

TrajectorySample SplineTrajectory::evaluate(double t) const {
  constexpr double kEdgeTol = 1e-9;
  if (t < t_in_ - kEdgeTol || t > t_f_ + kEdgeTol)
    throw std::domain_error("SplineTrajectory::evaluate: t outside [t_in, t_f]");
  t = std::clamp(t, t_in_, t_f_);

  const auto vel = derivative_ctrl(kPosDegree, pos_ctrl_, pos_knots_);
  const auto vel_knots = interior_knots(pos_knots_);
  const auto acc = derivative_ctrl(kPosDegree - 1, vel, vel_knots);
  const auto acc_knots = interior_knots(vel_knots);
  const auto jrk = derivative_ctrl(kPosDegree - 2, acc, acc_knots);
  const auto jrk_knots = interior_knots(acc_knots);

  const auto yr = derivative_ctrl(kYawDegree, yaw_ctrl_, yaw_knots_);
  const auto yr_knots = interior_knots(yaw_knots_);
  const auto ya = derivative_ctrl(kYawDegree - 1, yr, yr_knots);
  const auto ya_knots = interior_knots(yr_knots);

  TrajectorySample s;
  s.t = t;
  s.position = de_boor(kPosDegree, pos_ctrl_, pos_knots_, t);
  s.velocity = de_boor(kPosDegree - 1, vel, vel_knots, t);
  s.acceleration = de_boor(kPosDegree - 2, acc, acc_knots, t);
  s.jerk = de_boor(kPosDegree - 3, jrk, jrk_knots, t);
  s.yaw = de_boor(kYawDegree, yaw_ctrl_, yaw_knots_, t);
  s.yaw_rate = de_boor(kYawDegree - 1, yr, yr_knots, t);
  s.yaw_accel = de_boor(kYawDegree - 2, ya, ya_knots, t);
  return s;
}

std::vector<Vec3> SplineTrajectory::interval_hull(int interval) const {
  if (interval < 0 || interval >= num_intervals())
    throw std::out_of_range("SplineTrajectory::interval_hull: bad interval");
  return std::vector<Vec3>(pos_ctrl_.begin() + interval,
                           pos_ctrl_.begin() + interval + kPosDegree + 1);
}

std::vector<std::vector<Vec3>> SplineTrajectory::velocity_control_points() const {
  const auto vel = velocity_ctrl_flat();
  std::vector<std::vector<Vec3>> out(num_intervals());
  for (int j = 0; j < num_intervals(); ++j)
    out[j] = std::vector<Vec3>(vel.begin() + j, vel.begin() + j + kPosDegree);
  return out;
}

std::vector<Vec3> SplineTrajectory::velocity_ctrl_flat() const {
  return derivative_ctrl(kPosDegree, pos_ctrl_, pos_knots_);
}

std::vector<Vec3> SplineTrajectory::acceleration_ctrl_flat() const {
  const auto vel = velocity_ctrl_flat();
  return derivative_ctrl(kPosDegree - 1, vel, interior_knots(pos_knots_));
}

std::vector<Vec3> SplineTrajectory::jerk_ctrl_flat() const {
  const auto vel = velocity_ctrl_flat();
  const auto vel_knots = interior_knots(pos_knots_);
  const auto acc = derivative_ctrl(kPosDegree - 1, vel, vel_knots);
  return derivative_ctrl(kPosDegree - 2, acc, interior_knots(vel_knots));
}

std::vector<double> SplineTrajectory::yaw_rate_ctrl_flat() const {
  return derivative_ctrl(kYawDegree, yaw_ctrl_, yaw_knots_);
}

double SplineTrajectory::interval_start(int interval) const {
  if (interval < 0 || interval >= num_intervals())
    throw std::out_of_range("SplineTrajectory::interval_start: bad interval");
  return t_in_ + duration() * interval / num_intervals();
}

double SplineTrajectory::interval_end(int interval) const {
  if (interval < 0 || interval >= num_intervals())
    throw std::out_of_range("SplineTrajectory::interval_end: bad interval");
  return t_in_ + duration() * (interval + 1) / num_intervals();
}

int SplineTrajectory::interval_of(double t) const {
  constexpr double kEdgeTol = 1e-9;
  if (t < t_in_ - kEdgeTol || t > t_f_ + kEdgeTol)
    throw std::domain_error("SplineTrajectory::interval_of: t outside [t_in, t_f]");
  const double u = (std::clamp(t, t_in_, t_f_) - t_in_) / duration();
  return std::clamp(static_cast<int>(u * num_intervals()), 0, num_intervals() - 1);
}

std::vector<TimedPoint> SplineTrajectory::sample_uniform(int n) const {
  if (n < 2) throw std::invalid_argument("sample_uniform: need n >= 2");
  std::vector<TimedPoint> out(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i == n - 1) ? t_f_ : t_in_ + duration() * i / (n - 1);
    out[i] = TimedPoint{t, evaluate(t).position};
  }
  return out;
}

nlohmann::json SplineTrajectory::to_json() const {
  nlohmann::json j;
  j["t_in"] = t_in_;
  j["t_f"] = t_f_;
  auto& pos = j["pos_ctrl"] = nlohmann::json::array();
  for (const auto& p : pos_ctrl_) pos.push_back({p.x(), p.y(), p.z()});
  j["yaw_ctrl"] = yaw_ctrl_;
  return j;
}

SplineTrajectory SplineTrajectory::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("t_in") || !j.contains("t_f") ||
      !j.contains("pos_ctrl") || !j.contains("yaw_ctrl"))
    throw std::invalid_argument("SplineTrajectory::from_json: missing fields");
  if (!j["pos_ctrl"].is_array() || !j["yaw_ctrl"].is_array())
    throw std::invalid_argument("SplineTrajectory::from_json: ctrl fields must be arrays");
  std::vector<Vec3> pos;
  for (const auto& e : j["pos_ctrl"]) {
    if (!e.is_array() || e.size() != 3)
      throw std::invalid_argument("SplineTrajectory::from_json: bad position entry");
    pos.emplace_back(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
  }
  std::vector<double> yaw = j["yaw_ctrl"].get<std::vector<double>>();
  return SplineTrajectory(std::move(pos), std::move(yaw), j["t_in"].get<double>(),
                          j["t_f"].get<double>());
}

}  // namespace swarm
