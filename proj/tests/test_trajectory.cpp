#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "swarm/trajectory.hpp"

using namespace swarm;

namespace {

SplineTrajectory random_traj(std::mt19937& rng, int intervals = 5) {
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<Vec3> pos(intervals + 3);
  for (auto& p : pos) p = Vec3(u(rng), u(rng), u(rng));
  std::vector<double> yaw(intervals + 2);
  for (auto& y : yaw) y = 0.5 * u(rng);
  std::uniform_real_distribution<double> dur(1.0, 6.0);
  const double t0 = 0.25 * (u(rng) + 4.0);
  return SplineTrajectory(std::move(pos), std::move(yaw), t0, t0 + dur(rng));
}

}  // namespace

TEST_CASE("constant spline stays put with zero derivatives") {
  const Vec3 c(1.0, -2.0, 3.0);
  const auto traj = SplineTrajectory::constant(c, 0.4, 0.0, 5.0, 4);
  for (double t : {0.0, 1.3, 2.5, 4.99, 5.0}) {
    const auto s = traj.evaluate(t);
    CHECK((s.position - c).norm() < 1e-12);
    CHECK(s.velocity.norm() < 1e-12);
    CHECK(s.acceleration.norm() < 1e-12);
    CHECK(s.jerk.norm() < 1e-12);
    CHECK(s.yaw == doctest::Approx(0.4));
    CHECK(std::abs(s.yaw_rate) < 1e-12);
  }
}

TEST_CASE("clamped endpoints interpolate first/last control points") {
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto traj = random_traj(rng);
    const auto s0 = traj.evaluate(traj.t_in());
    const auto s1 = traj.evaluate(traj.t_f());
    CHECK((s0.position - traj.position_control_points().front()).norm() < 1e-12);
    CHECK((s1.position - traj.position_control_points().back()).norm() < 1e-12);
    CHECK(s0.yaw == doctest::Approx(traj.yaw_control_points().front()).epsilon(1e-12));
    CHECK(s1.yaw == doctest::Approx(traj.yaw_control_points().back()).epsilon(1e-12));
  }
}

TEST_CASE("analytic derivatives match central finite differences") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> pick(0.02, 0.98);
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    const auto traj = random_traj(rng);
    for (int k = 0; k < 25; ++k) {
      const double t = traj.t_in() + pick(rng) * traj.duration();
      const auto s = traj.evaluate(t);
      auto pos = [&](double tt) { return traj.evaluate(tt).position; };
      auto vel = [&](double tt) { return traj.evaluate(tt).velocity; };
      auto acc = [&](double tt) { return traj.evaluate(tt).acceleration; };
      auto yaw = [&](double tt) { return traj.evaluate(tt).yaw; };
      auto yr = [&](double tt) { return traj.evaluate(tt).yaw_rate; };
      const Vec3 v_fd = oracle::central_diff(pos, t);
      const Vec3 a_fd = oracle::central_diff(vel, t);
      const Vec3 j_fd = oracle::central_diff(acc, t);
      CHECK((s.velocity - v_fd).norm() < 1e-5 * (1.0 + v_fd.norm()));
      CHECK((s.acceleration - a_fd).norm() < 1e-5 * (1.0 + a_fd.norm()));
      CHECK((s.jerk - j_fd).norm() < 1e-4 * (1.0 + j_fd.norm()));
      CHECK(std::abs(s.yaw_rate - oracle::central_diff_scalar(yaw, t)) < 1e-5);
      CHECK(std::abs(s.yaw_accel - oracle::central_diff_scalar(yr, t)) < 1e-4);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("evaluate outside domain throws") {
  const auto traj = SplineTrajectory::constant(Vec3::Zero(), 0.0, 1.0, 2.0);
  CHECK_THROWS_AS(traj.evaluate(0.5), std::domain_error);
  CHECK_THROWS_AS(traj.evaluate(2.5), std::domain_error);
}

TEST_CASE("interval hull has 4 points and contains the curve segment") {
  std::mt19937 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto traj = random_traj(rng, 4);
    for (int j = 0; j < traj.num_intervals(); ++j) {
      const auto hull = traj.interval_hull(j);
      CHECK(hull.size() == 4);
      const double a = traj.interval_start(j), b = traj.interval_end(j);
      for (int s = 0; s <= 25; ++s) {
        const double t = a + (b - a) * s / 25.0;
        const Vec3 p = traj.evaluate(t).position;
        CHECK(oracle::distance_to_hull(p, hull) < 1e-9);
      }
    }
  }
}

TEST_CASE("single-interval clamped spline hull is all control points") {
  std::mt19937 rng(37);
  const auto traj = random_traj(rng, 1);
  CHECK(traj.num_intervals() == 1);
  CHECK(traj.interval_hull(0).size() == traj.position_control_points().size());
}

TEST_CASE("velocity control points bound the sampled velocity curve") {
  std::mt19937 rng(41);
  for (int i = 0; i < 20; ++i) {
    const auto traj = random_traj(rng);
    const auto vj = traj.velocity_control_points();
    REQUIRE(static_cast<int>(vj.size()) == traj.num_intervals());
    for (int j = 0; j < traj.num_intervals(); ++j) {
      Vec3 bound = Vec3::Zero();
      for (const auto& v : vj[j]) bound = bound.cwiseMax(v.cwiseAbs());
      const double a = traj.interval_start(j), b = traj.interval_end(j);
      for (int s = 0; s <= 40; ++s) {
        const Vec3 v = traj.evaluate(a + (b - a) * s / 40.0).velocity;
        CHECK((v.cwiseAbs() - bound).maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("control points linear in t give constant velocity control points") {
  // Linear-in-t means control point i sits at the curve's Greville abscissa
  // xi_i = (u_{i+1}+...+u_{i+p})/p; the spline then reproduces a straight
  // line traversed at constant speed (linear precision).
  const auto knots = clamped_uniform_knots(3, 4, 0.0, 4.0);
  const Vec3 slope(1.0, -2.0, 0.5);
  std::vector<Vec3> pos;
  for (int i = 0; i < 7; ++i) {
    const double greville = (knots[i + 1] + knots[i + 2] + knots[i + 3]) / 3.0;
    pos.push_back(greville * slope);
  }
  std::vector<double> yaw(6, 0.0);
  SplineTrajectory traj(pos, yaw, 0.0, 4.0);
  const auto flat = traj.velocity_ctrl_flat();
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK((flat[i] - slope).norm() < 1e-9);
  for (double t : {0.0, 0.7, 2.2, 4.0})
    CHECK((traj.evaluate(t).position - t * slope).norm() < 1e-9);
}

TEST_CASE("sample_uniform endpoints and spacing") {
  std::mt19937 rng(43);
  const auto traj = random_traj(rng);
  const auto two = traj.sample_uniform(2);
  CHECK(two.size() == 2);
  CHECK(two.front().t == doctest::Approx(traj.t_in()));
  CHECK(two.back().t == doctest::Approx(traj.t_f()));
  const auto many = traj.sample_uniform(11);
  for (std::size_t i = 1; i < many.size(); ++i) {
    const double gap = many[i].t - many[i - 1].t;
    CHECK(gap == doctest::Approx(traj.duration() / 10.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(traj.sample_uniform(1), std::invalid_argument);
}

TEST_CASE("json round trip preserves the trajectory") {
  std::mt19937 rng(47);
  const auto traj = random_traj(rng);
  const auto j = traj.to_json();
  const auto back = SplineTrajectory::from_json(j);
  CHECK(back.t_in() == doctest::Approx(traj.t_in()).epsilon(1e-15));
  CHECK(back.t_f() == doctest::Approx(traj.t_f()).epsilon(1e-15));
  for (double t : {traj.t_in(), traj.t_in() + 0.37 * traj.duration(), traj.t_f()}) {
    CHECK((back.evaluate(t).position - traj.evaluate(t).position).norm() < 1e-12);
    CHECK(back.evaluate(t).yaw == doctest::Approx(traj.evaluate(t).yaw).epsilon(1e-12));
  }
  CHECK_THROWS_AS(SplineTrajectory::from_json(nlohmann::json::object()),
                  std::invalid_argument);
}

TEST_CASE("constructor rejects inconsistent inputs") {
  std::vector<Vec3> pos(4, Vec3::Zero());
  std::vector<double> yaw(3, 0.0);
  CHECK_THROWS_AS(SplineTrajectory(pos, yaw, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SplineTrajectory({Vec3::Zero()}, {0.0}, 0.0, 1.0),
                  std::invalid_argument);
  std::vector<double> bad_yaw(5, 0.0);
  CHECK_THROWS_AS(SplineTrajectory(pos, bad_yaw, 0.0, 1.0), std::invalid_argument);
}
