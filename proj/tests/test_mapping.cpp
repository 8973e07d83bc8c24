#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "swarm/mapping.hpp"

using namespace swarm;

namespace {

// Camera 2 m above the origin looking straight down, camera x along world x.
Pose3 nadir_camera(double height = 2.0) {
  Pose3 p;
  p.translation = Vec3(0.0, 0.0, height);
  p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Vec3::UnitX()));
  return p;
}

SyntheticDetector down_detector() {
  SyntheticDetector det;
  det.mount = pitched_camera_mount(M_PI / 2.0);  // straight down from body
  det.fov_angle = 2.0;
  det.pixel_sigma = 0.0;
  det.detection_probability = 1.0;
  det.min_apparent_px = 0.0;
  det.max_apparent_px = 1e9;
  return det;
}

}  // namespace

TEST_CASE("detect: behind-camera landmarks absent, on-axis pixel at center") {
  SyntheticDetector det;
  det.pixel_sigma = 0.0;
  det.detection_probability = 1.0;
  det.min_apparent_px = 0.0;
  det.max_apparent_px = 1e9;
  std::mt19937_64 rng(1);
  const Pose3 ego = pose3_from_planar(Vec3(0, 0, 1), 0.0);  // forward camera +x

  // one landmark ahead on the optical axis... the axis hits the ground only
  // at infinity for a level camera, so use a slightly pitched mount.
  det.mount = pitched_camera_mount(std::atan2(1.0, 4.0));
  const std::vector<TrueLandmark> marks = {{Vec2(4.0, 0.0), 0.5},
                                           {Vec2(-4.0, 0.0), 0.5}};
  const auto batch = detect(marks, ego, ego, det, 0.0, rng);
  REQUIRE(batch.detections.size() == 1);  // the one behind is absent
  CHECK(batch.detections[0].u_cent == doctest::Approx(det.intrinsics.cx).epsilon(1e-9));
  CHECK(batch.detections[0].v_cent == doctest::Approx(det.intrinsics.cy).epsilon(1e-9));
}

TEST_CASE("detect: pixels equal hand-computed pinhole projection") {
  auto det = down_detector();
  std::mt19937_64 rng(2);
  const Pose3 ego = pose3_from_planar(Vec3(1.0, 2.0, 3.0), 0.0);
  const std::vector<TrueLandmark> marks = {{Vec2(1.5, 2.5), 0.5}};
  const auto batch = detect(marks, ego, ego, det, 0.0, rng);
  REQUIRE(batch.detections.size() == 1);
  // body at (1,2,3) looking down: camera x = body -y... compute directly
  const Pose3 cam = compose(ego, det.mount);
  const Vec3 p_cam = apply(inverse(cam), Vec3(1.5, 2.5, 0.0));
  const double u = det.intrinsics.fx * p_cam.x() / p_cam.z() + det.intrinsics.cx;
  const double v = det.intrinsics.fy * p_cam.y() / p_cam.z() + det.intrinsics.cy;
  CHECK(batch.detections[0].u_cent == doctest::Approx(u).epsilon(1e-12));
  CHECK(batch.detections[0].v_cent == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("detect: apparent-size filter and dropout behave") {
  auto det = down_detector();
  det.min_apparent_px = 60.0;  // fx*0.5/2 = 75 passes; fx*0.1/2 = 15 fails
  std::mt19937_64 rng(3);
  const Pose3 ego = pose3_from_planar(Vec3(0, 0, 2), 0.0);
  const std::vector<TrueLandmark> marks = {{Vec2(0.1, 0.1), 0.5},
                                           {Vec2(-0.1, 0.1), 0.1}};
  const auto batch = detect(marks, ego, ego, det, 0.0, rng);
  CHECK(batch.detections.size() == 1);

  det.detection_probability = 0.0;
  const auto none = detect(marks, ego, ego, det, 0.0, rng);
  CHECK(none.detections.empty());
}

TEST_CASE("project_to_ground nadir and offset rays") {
  const Pose3 cam = nadir_camera(2.0);
  CameraIntrinsics k;
  Detection center{k.cx, k.cy, 0.0};
  const Vec2 p0 = project_to_ground(center, cam, k);
  CHECK(p0.norm() < 1e-12);

  Detection off{k.cx + k.fx, k.cy, 0.0};
  const Vec2 p1 = project_to_ground(off, cam, k);
  CHECK(p1.x() == doctest::Approx(2.0).epsilon(1e-12));  // height*(u-cx)/fx
  CHECK(std::abs(p1.y()) < 1e-12);

  // level camera: horizontal ray never meets the plane
  Pose3 level;
  level.translation = Vec3(0, 0, 2);
  CHECK_THROWS_AS(project_to_ground(Detection{k.cx, k.cy, 0.0}, level, k),
                  std::runtime_error);
  // looking up: intersection behind the camera
  Pose3 up;
  up.translation = Vec3(0, 0, 2);
  up.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(-M_PI / 2, Vec3::UnitX()));
  const Vec3 dir = up.rotation * Vec3::UnitZ();
  if (dir.z() > 0.0)
    CHECK_THROWS_AS(project_to_ground(Detection{k.cx, k.cy, 0.0}, up, k),
                    std::runtime_error);
}

TEST_CASE("projection inverts detection exactly with zero noise") {
  auto det = down_detector();
  std::mt19937_64 rng(5);
  const Pose3 ego = pose3_from_planar(Vec3(2.0, -1.0, 4.0), 0.7);
  const std::vector<TrueLandmark> marks = {{Vec2(2.5, 0.5), 0.5}};
  const auto batch = detect(marks, ego, ego, det, 0.0, rng);
  REQUIRE(batch.detections.size() == 1);
  const Vec2 rec =
      project_to_ground(batch.detections[0], batch.interp_camera, det.intrinsics);
  CHECK((rec - marks[0].position).norm() < 1e-9);
}

TEST_CASE("range-stretched covariance") {
  const double st = 0.1;
  const Mat2 iso = range_stretched_covariance(Vec2(3, 0), Vec3(0, 0, 2), st, 1.0);
  CHECK((iso - st * st * Mat2::Identity()).norm() < 1e-12);

  const Mat2 ax = range_stretched_covariance(Vec2(3, 0), Vec3(0, 0, 2), st, 3.0);
  CHECK(ax(0, 0) == doctest::Approx(9.0 * st * st).epsilon(1e-12));
  CHECK(ax(1, 1) == doctest::Approx(st * st).epsilon(1e-12));
  CHECK(std::abs(ax(0, 1)) < 1e-15);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p(u(rng), u(rng));
    const Vec3 c(u(rng), u(rng), 2.0);
    if ((p - c.head<2>()).norm() < 1e-6) continue;
    const Mat2 cov = range_stretched_covariance(p, c, st, 3.0);
    Eigen::SelfAdjointEigenSolver<Mat2> es(cov);
    CHECK(es.eigenvalues()(1) / es.eigenvalues()(0) ==
          doctest::Approx(9.0).epsilon(1e-9));
  }

  const Mat2 degen = range_stretched_covariance(Vec2(1, 1), Vec3(1, 1, 2), st, 3.0);
  CHECK((degen - st * st * Mat2::Identity()).norm() < 1e-12);
}

TEST_CASE("hungarian small cases") {
  Eigen::MatrixXd diag(3, 3);
  diag << 0, 5, 5, 5, 0, 5, 5, 5, 0;
  const auto a = hungarian(diag);
  CHECK(a == std::vector<int>({0, 1, 2}));

  Eigen::MatrixXd two(2, 2);
  two << 1, 2, 2, 1;
  const auto b = hungarian(two);
  CHECK(b == std::vector<int>({0, 1}));

  // rectangular: 2 rows, 3 cols
  Eigen::MatrixXd rect(2, 3);
  rect << 10, 1, 10, 1, 10, 10;
  const auto c = hungarian(rect);
  CHECK(c == std::vector<int>({1, 0}));

  // sentinel-only row stays unassigned
  Eigen::MatrixXd gated(2, 2);
  gated << 1.0, kAssignmentSentinel, kAssignmentSentinel, kAssignmentSentinel;
  const auto d = hungarian(gated);
  CHECK(d[0] == 0);
  CHECK(d[1] == -1);
}

TEST_CASE("hungarian equals brute force on random instances") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(u(rng) * 0.5) % 6;  // 2..7
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = u(rng);
    const auto assign = hungarian(cost);
    double total = 0.0;
    std::set<int> cols;
    for (int i = 0; i < n; ++i) {
      REQUIRE(assign[i] >= 0);
      cols.insert(assign[i]);
      total += cost(i, assign[i]);
    }
    CHECK(cols.size() == static_cast<std::size_t>(n));  // one-to-one
    CHECK(total == doctest::Approx(oracle::brute_force_assignment(cost)).epsilon(1e-9));
  }
}

TEST_CASE("gnn association gating and matching") {
  LocalMap map;
  map.owner = 0;
  const auto r = associate_gnn({{Vec2(1, 1), Mat2::Identity()}}, map);
  CHECK(r.matches.empty());
  CHECK(r.new_detections == std::vector<int>({0}));

  Landmark lm;
  lm.id = 42;
  lm.position = Vec2(1, 1);
  lm.covariance = 0.01 * Mat2::Identity();
  map.landmarks.push_back(lm);
  map.next_id = 43;

  const auto hit = associate_gnn({{Vec2(1, 1), 0.01 * Mat2::Identity()}}, map);
  REQUIRE(hit.matches.size() == 1);
  CHECK(hit.matches[0].second == 42);
  CHECK(hit.missed_landmarks.empty());

  // 10-sigma-away detection is outside the 0.99 gate -> new landmark
  const auto miss = associate_gnn({{Vec2(1.0 + 10.0 * 0.1 * std::sqrt(2.0), 1.0),
                                    0.01 * Mat2::Identity()}},
                                  map);
  CHECK(miss.matches.empty());
  CHECK(miss.new_detections.size() == 1);
  CHECK(miss.missed_landmarks == std::vector<long>({42}));
}

TEST_CASE("update_map lifecycle: fusion, deletion, fresh ids") {
  LocalMap map;
  std::vector<ProjectedDetection> det = {{Vec2(0, 0), 0.04 * Mat2::Identity()}};
  auto assoc = associate_gnn(det, map);
  update_map(map, det, assoc, 3, 0.0);
  REQUIRE(map.landmarks.size() == 1);
  const long first_id = map.landmarks[0].id;
  CHECK((map.landmarks[0].covariance - det[0].covariance).norm() < 1e-12);

  // equal landmark/measurement covariance -> fused covariance halves
  assoc = associate_gnn(det, map);
  REQUIRE(assoc.matches.size() == 1);
  update_map(map, det, assoc, 3, 1.0);
  CHECK((map.landmarks[0].covariance - 0.02 * Mat2::Identity()).norm() < 1e-9);

  // repeated identical observations: trace strictly decreasing
  double prev = map.landmarks[0].covariance.trace();
  for (int f = 0; f < 10; ++f) {
    assoc = associate_gnn(det, map);
    update_map(map, det, assoc, 3, 2.0 + f);
    const double cur = map.landmarks[0].covariance.trace();
    CHECK(cur < prev);
    prev = cur;
  }

  // miss the landmark kappa times -> deleted; id never resurrected
  for (int f = 0; f < 3; ++f) {
    REQUIRE_FALSE(map.landmarks.empty());
    AssociationResult none;
    none.missed_landmarks.push_back(first_id);
    update_map(map, {}, none, 3, 20.0 + f);
  }
  CHECK(map.landmarks.empty());

  assoc = associate_gnn(det, map);
  update_map(map, det, assoc, 3, 30.0);
  REQUIRE(map.landmarks.size() == 1);
  CHECK(map.landmarks[0].id != first_id);
}

TEST_CASE("kappa=1 deletes after a single miss") {
  LocalMap map;
  std::vector<ProjectedDetection> det = {{Vec2(5, 5), Mat2::Identity()}};
  update_map(map, det, associate_gnn(det, map), 1, 0.0);
  REQUIRE(map.landmarks.size() == 1);
  update_map(map, {}, associate_gnn({}, map), 1, 1.0);
  CHECK(map.landmarks.empty());
}

TEST_CASE("zero-noise pipeline converges to true landmark positions") {
  auto det = down_detector();
  std::mt19937_64 rng(13);
  const Pose3 ego = pose3_from_planar(Vec3(0.0, 0.0, 5.0), 0.3);
  const std::vector<TrueLandmark> marks = {
      {Vec2(1.0, 0.5), 0.5}, {Vec2(-0.8, 1.2), 0.5}, {Vec2(0.2, -1.5), 0.5}};
  LocalMap map;
  for (int frame = 0; frame < 10; ++frame) {
    const auto batch = detect(marks, ego, ego, det, 0.1 * frame, rng);
    std::vector<ProjectedDetection> proj;
    for (const auto& d : batch.detections) {
      ProjectedDetection pd;
      pd.position = project_to_ground(d, batch.interp_camera, det.intrinsics);
      pd.covariance = range_stretched_covariance(
          pd.position, batch.interp_camera.translation, 0.1, 3.0);
      proj.push_back(pd);
    }
    update_map(map, proj, associate_gnn(proj, map), 20, 0.1 * frame);
  }
  REQUIRE(map.landmarks.size() == marks.size());
  for (const auto& m : marks) {
    double best = 1e9;
    for (const auto& lm : map.landmarks)
      best = std::min(best, (lm.position - m.position).norm());
    CHECK(best < 1e-3);
  }
  for (const auto& lm : map.landmarks) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(lm.covariance);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("local map json round trip") {
  LocalMap map;
  map.owner = 3;
  map.next_id = 8;
  Landmark lm;
  lm.id = 7;
  lm.position = Vec2(1.25, -0.5);
  lm.covariance << 0.04, 0.01, 0.01, 0.09;
  lm.last_seen = 12.5;
  lm.observation_count = 4;
  map.landmarks.push_back(lm);

  const auto j = map.to_json();
  const auto back = LocalMap::from_json(j);
  CHECK(back.owner == 3);
  CHECK(back.next_id == 8);
  REQUIRE(back.landmarks.size() == 1);
  CHECK(back.landmarks[0].id == 7);
  CHECK((back.landmarks[0].position - lm.position).norm() < 1e-15);
  CHECK((back.landmarks[0].covariance - lm.covariance).norm() < 1e-15);
  CHECK(back.landmarks[0].last_seen == doctest::Approx(12.5));
  CHECK_THROWS_AS(LocalMap::from_json(nlohmann::json::array()),
                  std::invalid_argument);
}
