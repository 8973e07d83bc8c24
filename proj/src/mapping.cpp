#include "swarm/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "swarm/uncertainty.hpp"

namespace swarm {

const Landmark* LocalMap::find(long id) const {
  for (const auto& lm : landmarks)
    if (lm.id == id) return &lm;
  return nullptr;
}

nlohmann::json LocalMap::to_json() const {
  nlohmann::json j;
  j["owner"] = owner;
  j["next_id"] = next_id;
  auto& arr = j["landmarks"] = nlohmann::json::array();
  for (const auto& lm : landmarks) {
    arr.push_back({{"id", lm.id},
                   {"position", {lm.position.x(), lm.position.y()}},
                   {"covariance",
                    {lm.covariance(0, 0), lm.covariance(0, 1), lm.covariance(1, 0),
                     lm.covariance(1, 1)}},
                   {"last_seen", lm.last_seen},
                   {"observation_count", lm.observation_count}});
  }
  return j;
}

LocalMap LocalMap::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("owner") || !j.contains("landmarks"))
    throw std::invalid_argument("LocalMap::from_json: missing fields");
  LocalMap m;
  m.owner = j["owner"].get<int>();
  m.next_id = j.value("next_id", 0L);
  for (const auto& e : j["landmarks"]) {
    Landmark lm;
    lm.id = e.at("id").get<long>();
    lm.position = Vec2(e.at("position")[0].get<double>(),
                       e.at("position")[1].get<double>());
    const auto& c = e.at("covariance");
    lm.covariance << c[0].get<double>(), c[1].get<double>(), c[2].get<double>(),
        c[3].get<double>();
    lm.last_seen = e.at("last_seen").get<double>();
    lm.observation_count = e.value("observation_count", 0);
    m.landmarks.push_back(lm);
  }
  return m;
}

DetectionBatch detect(const std::vector<TrueLandmark>& true_landmarks,
                      const Pose3& drifted_ego, const Pose3& truth_ego,
                      const SyntheticDetector& detector, double stamp,
                      std::mt19937_64& rng) {
  DetectionBatch batch;
  batch.stamp = stamp;
  batch.interp_camera = compose(drifted_ego, detector.mount);

  const Pose3 camera_true = compose(truth_ego, detector.mount);
  const Pose3 cam_inv = inverse(camera_true);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> px(0.0, 1.0);

  for (const auto& lm : true_landmarks) {
    const Vec3 p_cam = apply(cam_inv, Vec3(lm.position.x(), lm.position.y(), 0.0));
    if (p_cam.z() < 1e-6) continue;
    if (fov_score(p_cam, detector.fov_angle) <= 0.0) continue;
    const double apparent = detector.intrinsics.fx * lm.diameter / p_cam.z();
    if (apparent < detector.min_apparent_px || apparent > detector.max_apparent_px)
      continue;
    if (coin(rng) > detector.detection_probability) continue;
    Detection d;
    d.u_cent = detector.intrinsics.fx * p_cam.x() / p_cam.z() + detector.intrinsics.cx;
    d.v_cent = detector.intrinsics.fy * p_cam.y() / p_cam.z() + detector.intrinsics.cy;
    if (detector.pixel_sigma > 0.0) {
      d.u_cent += detector.pixel_sigma * px(rng);
      d.v_cent += detector.pixel_sigma * px(rng);
    }
    d.stamp = stamp;
    batch.detections.push_back(d);
  }
  return batch;
}

Vec2 project_to_ground(const Detection& d, const Pose3& camera,
                       const CameraIntrinsics& k) {
  validate(k);
  const Vec3 ray_cam((d.u_cent - k.cx) / k.fx, (d.v_cent - k.cy) / k.fy, 1.0);
  const Vec3 ray_world = camera.rotation * ray_cam;
  if (std::abs(ray_world.z()) < 1e-9)
    throw std::runtime_error("project_to_ground: ray parallel to ground plane");
  const double lambda = -camera.translation.z() / ray_world.z();
  if (lambda <= 0.0)
    throw std::runtime_error("project_to_ground: ray points away from ground plane");
  const Vec3 p = camera.translation + lambda * ray_world;
  return p.head<2>();
}

Mat2 range_stretched_covariance(const Vec2& p, const Vec3& camera_position,
                                double sigma_t, double stretch) {
  const Vec2 d = p - camera_position.head<2>();
  const double st2 = sigma_t * sigma_t;
  if (d.norm() < 1e-9) return st2 * Mat2::Identity();
  const Vec2 r = d.normalized();
  const Vec2 t(-r.y(), r.x());
  return stretch * stretch * st2 * r * r.transpose() + st2 * t * t.transpose();
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const int n = std::max(rows, cols);

  // Pad to square; dummy entries cost 0 so they never affect real choices.
  auto at = [&](int r, int c) -> double {
    return (r < rows && c < cols) ? cost(r, c) : 0.0;
  };

  // Potentials-based augmenting assignment, O(n^3).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assign(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols && at(i - 1, j - 1) < kAssignmentSentinel)
      assign[i - 1] = j - 1;
  }
  return assign;
}

AssociationResult associate_gnn(const std::vector<ProjectedDetection>& detections,
                                const LocalMap& map, double gate_level) {
  AssociationResult out;
  const int nd = static_cast<int>(detections.size());
  const int nl = static_cast<int>(map.landmarks.size());
  if (nd == 0) {
    for (const auto& lm : map.landmarks) out.missed_landmarks.push_back(lm.id);
    return out;
  }
  const double gate = chi_square_quantile(2, gate_level);

  Eigen::MatrixXd cost(nd, nl);
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < nl; ++j) {
      const auto& lm = map.landmarks[j];
      const Mat2 S = lm.covariance + detections[i].covariance;
      const Vec2 r = detections[i].position - lm.position;
      const double m2 = r.dot(S.ldlt().solve(r));
      cost(i, j) = (m2 <= gate) ? m2 : kAssignmentSentinel;
    }
  }

  const auto assign = hungarian(cost);
  std::vector<char> landmark_used(nl, 0);
  for (int i = 0; i < nd; ++i) {
    if (assign[i] >= 0) {
      out.matches.emplace_back(i, map.landmarks[assign[i]].id);
      landmark_used[assign[i]] = 1;
    } else {
      out.new_detections.push_back(i);
    }
  }
  for (int j = 0; j < nl; ++j)
    if (!landmark_used[j]) out.missed_landmarks.push_back(map.landmarks[j].id);
  return out;
}

void update_map(LocalMap& map, const std::vector<ProjectedDetection>& detections,
                const AssociationResult& assoc, int kappa, double now) {
  for (const auto& [di, lid] : assoc.matches) {
    for (auto& lm : map.landmarks) {
      if (lm.id != lid) continue;
      const auto& det = detections[di];
      const Mat2 S = lm.covariance + det.covariance;
      const Mat2 K = lm.covariance * S.inverse();
      lm.position += K * (det.position - lm.position);
      lm.covariance = (Mat2::Identity() - K) * lm.covariance;
      lm.covariance = 0.5 * (lm.covariance + lm.covariance.transpose()).eval();
      lm.last_seen = now;
      ++lm.observation_count;
      lm.missed_streak = 0;
      break;
    }
  }

  for (auto& lm : map.landmarks) {
    if (lm.last_seen < now) ++lm.missed_streak;
  }
  map.landmarks.erase(std::remove_if(map.landmarks.begin(), map.landmarks.end(),
                                     [&](const Landmark& lm) {
                                       return lm.missed_streak >= kappa;
                                     }),
                      map.landmarks.end());

  for (int di : assoc.new_detections) {
    Landmark lm;
    lm.id = map.next_id++;
    lm.position = detections[di].position;
    lm.covariance = detections[di].covariance;
    lm.last_seen = now;
    lm.observation_count = 1;
    map.landmarks.push_back(lm);
  }
}

}  // namespace swarm
