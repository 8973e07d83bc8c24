#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "swarm/uncertainty.hpp"

using namespace swarm;

namespace {

Mat9 random_psd(std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat9 A;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) A(i, j) = n(rng);
  return scale * symmetrized(A * A.transpose()) / 9.0 + 1e-6 * Mat9::Identity();
}

}  // namespace

TEST_CASE("chi-square quantiles match numerical CDF inversion") {
  CHECK(chi_square_quantile(2, 0.99) == doctest::Approx(9.2103).epsilon(1e-4));
  CHECK(chi_square_quantile(2, 0.5) == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-12));
  CHECK(chi_square_quantile(3, 0.95) == doctest::Approx(7.8147).epsilon(1e-4));
  for (double level : {0.5, 0.9, 0.95, 0.99}) {
    CHECK(chi_square_quantile(3, level) ==
          doctest::Approx(oracle::chi2_quantile(3, level)).epsilon(1e-6));
    CHECK(chi_square_quantile(2, level) ==
          doctest::Approx(oracle::chi2_quantile(2, level)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(chi_square_quantile(4, 0.5), std::domain_error);
  CHECK_THROWS_AS(chi_square_quantile(3, 1.0), std::domain_error);
}

TEST_CASE("fov_score cone membership") {
  CHECK(fov_score(Vec3(0, 0, 1), M_PI) == doctest::Approx(1.0));
  CHECK(fov_score(Vec3(1, 0, 1), M_PI / 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fov_score(Vec3(0, 0, -1), M_PI / 2) ==
        doctest::Approx(-std::cos(M_PI / 4) - 1.0));
  CHECK(fov_score(Vec3(0, 0, 2), 1.0) > 0.0);
  CHECK_THROWS_AS(fov_score(Vec3::Zero(), 1.0), std::domain_error);
}

TEST_CASE("fov_noise multiplier endpoints and clamping") {
  FovModel fov;
  fov.R_max = Mat3::Identity();
  CHECK(fov_noise(1.0, fov).norm() < 1e-6);
  CHECK(fov_noise(0.0, fov)(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  bool clamped = false;
  const Mat3 R = fov_noise(-1.0, fov, &clamped);
  CHECK(R(0, 0) == doctest::Approx(2.0 / fov.epsilon).epsilon(1e-9));
  CHECK_FALSE(clamped);  // 2e6 is below the 1e9 ceiling
  fov_noise(-1.0 - 2.0 * fov.epsilon, fov, &clamped);
  CHECK(clamped);
}

TEST_CASE("fov_noise multiplier strictly decreasing in f") {
  FovModel fov;
  fov.R_max = Mat3::Identity();
  double prev = fov_noise(-1.0 - 0.9 * fov.epsilon, fov)(0, 0);
  for (double f = -0.999; f <= 1.0; f += 0.01) {
    const double cur = fov_noise(f, fov)(0, 0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("constant-acceleration transition integrates exactly") {
  const double dt = 0.37;
  const auto model = LinearModel::constant_acceleration(dt);
  Vec9 x;
  x << 1, 2, 3, -1, 0.5, 2, 0.2, -0.3, 0.1;
  const Vec9 y = model.F * x;
  const Vec3 p = x.head<3>(), v = x.segment<3>(3), a = x.tail<3>();
  CHECK((y.head<3>() - (p + dt * v + 0.5 * dt * dt * a)).norm() < 1e-12);
  CHECK((y.segment<3>(3) - (v + dt * a)).norm() < 1e-12);
  CHECK((y.tail<3>() - a).norm() < 1e-12);
  CHECK((model.H * x - p).norm() < 1e-12);
  // one unit entry per row of H
  for (int r = 0; r < 3; ++r) {
    CHECK(model.H.row(r).cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(model.H.row(r).maxCoeff() == doctest::Approx(1.0));
  }
}

TEST_CASE("open-loop propagation") {
  std::mt19937 rng(3);
  const Mat9 P = random_psd(rng);
  CHECK((propagate_open_loop(P, Mat9::Identity()) - P).norm() < 1e-12);
  CHECK((propagate_open_loop(Mat9::Identity(), 2.0 * Mat9::Identity()) -
         4.0 * Mat9::Identity())
            .norm() < 1e-12);
  const auto model = LinearModel::constant_acceleration(1.0);
  const Mat9 expect = model.F * Mat9::Identity() * model.F.transpose();
  CHECK((propagate_open_loop(Mat9::Identity(), model.F) - expect).norm() < 1e-12);
}

TEST_CASE("propagate_step limits: unobservable and exact measurement") {
  const auto model = LinearModel::constant_acceleration(0.1);
  FovModel fov;
  ObstacleBelief belief;
  belief.mean.head<3>() = Vec3(0, 0, -5);  // behind a +z-looking camera at origin
  Pose3 camera;  // identity: camera frame == world frame

  SUBCASE("far behind: huge noise, update is a no-op") {
    const auto res = propagate_step(belief, model, camera, fov);
    const Mat9 P_pred = propagate_open_loop(belief.covariance, model.F);
    CHECK((res.belief.covariance - P_pred).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("on-axis with full-sphere cone: position block collapses") {
    belief.mean.head<3>() = Vec3(0, 0, 5);
    fov.opening_angle = M_PI;  // f = 1 on-axis -> R = 0
    ObstacleBelief b2 = belief;
    b2.mean.segment<3>(3).setZero();
    const auto res = propagate_step(b2, model, camera, fov);
    CHECK(res.belief.position_covariance().cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("propagate_step matches scalar kalman identity on cone boundary") {
  // Obstacle on the cone boundary gives f = 0, so R = R_max/(1+eps).
  LinearModel model;  // F = I keeps the prediction equal to the prior
  model.H = LinearModel::constant_acceleration(1.0).H;
  FovModel fov;
  fov.opening_angle = M_PI / 2;
  fov.R_max = Mat3::Identity();
  ObstacleBelief belief;
  const double d = 3.0;
  belief.mean.head<3>() = Vec3(d, 0, d);  // 45 deg off axis
  belief.covariance = Mat9::Identity();
  const auto res = propagate_step(belief, model, Pose3{}, fov);
  const double r = 1.0 / (1.0 + fov.epsilon);
  const double expect = r / (1.0 + r);  // p*r/(p+r) with p = 1
  for (int i = 0; i < 3; ++i)
    CHECK(res.belief.covariance(i, i) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(res.belief.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("measurement update never inflates the trace") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto model = LinearModel::constant_acceleration(0.2);
  FovModel fov;
  for (int i = 0; i < 200; ++i) {
    ObstacleBelief belief;
    belief.covariance = random_psd(rng, 2.0);
    belief.mean.head<3>() = Vec3(u(rng), u(rng), u(rng));
    const Pose3 camera = pose3_from_planar(Vec3(u(rng), u(rng), 0.0), u(rng));
    const auto res = propagate_step(belief, model, camera, fov);
    const Mat9 P_pred = propagate_open_loop(belief.covariance, model.F);
    CHECK(res.belief.covariance.trace() <= P_pred.trace() + 1e-9);
    // symmetry + PSD maintained
    CHECK_NOTHROW(res.belief.validate());
  }
}

TEST_CASE("propagate_horizon N=1 equals one step") {
  const auto model = LinearModel::constant_acceleration(0.1);
  FovModel fov;
  ObstacleBelief belief;
  belief.mean.head<3>() = Vec3(4, 0, 1);
  const auto traj = SplineTrajectory::constant(Vec3::Zero(), 0.0, 0.0, 2.0);
  const auto seq =
      propagate_horizon(belief, model, traj, 0.1, 1, forward_camera_mount(), fov);
  REQUIRE(seq.size() == 1);
  const auto s = traj.evaluate(0.1);
  const Pose3 camera =
      compose(pose3_from_planar(s.position, s.yaw), forward_camera_mount());
  const auto solo = propagate_step(belief, model, camera, fov);
  CHECK((seq[0].covariance - solo.belief.covariance).norm() < 1e-12);
}

TEST_CASE("horizon trace shrinks when watched, grows when unseen") {
  const auto model = LinearModel::constant_acceleration(0.1);
  FovModel fov;
  fov.opening_angle = M_PI;  // on-axis target measured near-exactly
  ObstacleBelief watched;
  watched.mean.head<3>() = Vec3(6, 0, 0);  // ahead of a forward camera
  const auto hover = SplineTrajectory::constant(Vec3::Zero(), 0.0, 0.0, 5.0);
  const auto seq =
      propagate_horizon(watched, model, hover, 0.1, 30, forward_camera_mount(), fov);
  for (std::size_t k = 1; k < seq.size(); ++k)
    CHECK(seq[k].covariance.trace() <= seq[k - 1].covariance.trace() + 1e-9);

  ObstacleBelief unseen = watched;
  unseen.mean.head<3>() = Vec3(-6, 0, 0);  // behind
  fov.opening_angle = 1.0;
  const auto seq2 =
      propagate_horizon(unseen, model, hover, 0.1, 30, forward_camera_mount(), fov);
  for (std::size_t k = 1; k < seq2.size(); ++k)
    CHECK(seq2[k].covariance.trace() >= seq2[k - 1].covariance.trace() - 1e-9);
}

TEST_CASE("motion uncertainty: facing travel direction vs facing away") {
  const double dt = 0.1;
  const int N = 20;
  const auto model = LinearModel::constant_acceleration(dt);
  FovModel fov;
  const Mat9 P0 = Mat9::Identity();

  // Ego moves along +x; p_traj sampled from the straight path ahead.
  std::vector<TimedPoint> p_traj;
  for (int i = 0; i <= 40; ++i)
    p_traj.push_back({0.1 * i, Vec3(0.2 * i, 0.0, 1.0)});

  std::vector<Pose3> facing, averted;
  for (int k = 1; k <= N; ++k) {
    const Vec3 pos(0.2 * (k - 1), 0.0, 1.0);
    facing.push_back(compose(pose3_from_planar(pos, 0.0), forward_camera_mount()));
    averted.push_back(compose(pose3_from_planar(pos, M_PI), forward_camera_mount()));
  }

  const auto seq_f =
      propagate_motion_uncertainty(facing, p_traj, P0, model, fov, 0.0, dt);
  const auto seq_a =
      propagate_motion_uncertainty(averted, p_traj, P0, model, fov, 0.0, dt);
  REQUIRE(seq_f.size() == N);
  REQUIRE(seq_a.size() == N);

  Mat9 P_open = P0;
  for (int k = 0; k < N; ++k) P_open = propagate_open_loop(P_open, model.F);
  CHECK(seq_f.back().covariance.trace() < seq_a.back().covariance.trace());
  CHECK((seq_a.back().covariance - P_open).cwiseAbs().maxCoeff() < 1e-6);

  CHECK(propagate_motion_uncertainty({}, p_traj, P0, model, fov, 0.0, dt).empty());
  CHECK_THROWS_AS(propagate_motion_uncertainty(facing, {}, P0, model, fov, 0.0, dt),
                  std::invalid_argument);
}

TEST_CASE("velocity bound arithmetic and monotonicity") {
  CHECK((velocity_bound(Mat3::Identity(), Vec3(2, 2, 2)) - Vec3(2, 2, 2)).norm() <
        1e-12);
  CHECK((velocity_bound(4.0 * Mat3::Identity(), Vec3(2, 2, 2)) - Vec3(1, 1, 1))
            .norm() < 1e-12);
  Mat3 P = Vec3(1, 4, 9).asDiagonal();
  CHECK((velocity_bound(P, Vec3(6, 6, 6)) - Vec3(6, 3, 2)).norm() < 1e-12);
  CHECK_THROWS_AS(velocity_bound(Mat3::Zero(), Vec3(1, 1, 1)), std::domain_error);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    Vec3 d1(u(rng), u(rng), u(rng));
    Vec3 d2 = d1 + Vec3(u(rng), u(rng), u(rng));
    const Vec3 b1 = velocity_bound(d1.asDiagonal(), Vec3(3, 3, 3));
    const Vec3 b2 = velocity_bound(d2.asDiagonal(), Vec3(3, 3, 3));
    CHECK((b2 - b1).maxCoeff() < 1e-12);
  }
}

TEST_CASE("confidence ellipsoid axes") {
  const auto e = confidence_ellipsoid(Mat3::Identity(), 0.95);
  const double r = std::sqrt(chi_square_quantile(3, 0.95));
  for (int i = 0; i < 3; ++i) CHECK(e.semi_axes[i] == doctest::Approx(r).epsilon(1e-9));

  Mat3 P = Vec3(4, 1, 1).asDiagonal();
  const auto e2 = confidence_ellipsoid(P, 0.95);
  CHECK(e2.semi_axes.maxCoeff() ==
        doctest::Approx(2.0 * e2.semi_axes.minCoeff()).epsilon(1e-9));

  const auto e3 = confidence_ellipsoid(Mat3::Identity(), 1e-12);
  CHECK(e3.semi_axes.maxCoeff() < 1e-3);

  Mat3 bad = -Mat3::Identity();
  CHECK_THROWS_AS(confidence_ellipsoid(bad, 0.95), std::domain_error);
}

TEST_CASE("belief and fov validation") {
  ObstacleBelief b;
  CHECK_NOTHROW(b.validate());
  b.covariance(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  FovModel f;
  CHECK_NOTHROW(f.validate());
  f.epsilon = 0.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
