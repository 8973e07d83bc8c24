#pragma once

#include <random>
#include <vector>

#include <json.hpp>

#include "swarm/geometry.hpp"

namespace swarm {

// One tracked ground-plane landmark in an agent's local frame.
struct Landmark {
  long id = 0;
  Vec2 position = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
  double last_seen = 0.0;
  int observation_count = 0;
  int missed_streak = 0;
};

struct LocalMap {
  int owner = 0;
  std::vector<Landmark> landmarks;
  long next_id = 0;

  const Landmark* find(long id) const;
  nlohmann::json to_json() const;
  static LocalMap from_json(const nlohmann::json& j);
};

struct Detection {
  double u_cent = 0.0;  // pixels
  double v_cent = 0.0;
  double stamp = 0.0;
};

// Ground-truth landmark used by the synthetic detector.
struct TrueLandmark {
  Vec2 position = Vec2::Zero();  // on the ground plane, z = 0
  double diameter = 0.5;         // m, drives the apparent-size filter
};

// Stands in for a segmentation front end: projects true landmarks through
// the true camera pose, filters by FOV cone and apparent size, then
// corrupts with pixel noise and dropout.
struct SyntheticDetector {
  Pose3 mount = forward_camera_mount();
  CameraIntrinsics intrinsics;
  double fov_angle = 1.57;         // rad, full opening angle of the cone
  double pixel_sigma = 1.0;        // px
  double detection_probability = 0.95;
  double min_apparent_px = 2.0;    // fx * diameter / depth below this -> dropped
  double max_apparent_px = 400.0;
};

// Detections plus the pose they will be interpreted with. The pixels come
// from the true camera pose; interpretation composes the *drifted* ego pose
// with the mount, which is how odometry drift corrupts the map.
struct DetectionBatch {
  std::vector<Detection> detections;
  Pose3 interp_camera;  // drifted ego pose composed with the mount
  double stamp = 0.0;
};

DetectionBatch detect(const std::vector<TrueLandmark>& true_landmarks,
                      const Pose3& drifted_ego, const Pose3& truth_ego,
                      const SyntheticDetector& detector, double stamp,
                      std::mt19937_64& rng);

// Back-project pixel through the camera pose onto z=0: p = X_c(lambda *
// K^-1 [u v 1]^T). Throws std::runtime_error when the ray is parallel to
// or points away from the ground plane.
Vec2 project_to_ground(const Detection& d, const Pose3& camera,
                       const CameraIntrinsics& k);

// 2x2 measurement covariance stretched along the camera->landmark ground
// direction; degenerate direction falls back to isotropic sigma_t^2 I.
Mat2 range_stretched_covariance(const Vec2& p, const Vec3& camera_position,
                                double sigma_t, double stretch);

// Costs at or above this are treated as forbidden pairings.
inline constexpr double kAssignmentSentinel = 1e12;

// Minimum-cost one-to-one assignment on an n x m cost matrix. Returns one
// column index per row (-1 when the row is unassigned or only sentinel
// pairings remained for it).
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct ProjectedDetection {
  Vec2 position = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

struct AssociationResult {
  // (detection index, landmark id) pairs
  std::vector<std::pair<int, long>> matches;
  std::vector<int> new_detections;   // detection indices
  std::vector<long> missed_landmarks;  // landmark ids
};

// Mahalanobis-gated global-nearest-neighbor association.
AssociationResult associate_gnn(const std::vector<ProjectedDetection>& detections,
                                const LocalMap& map, double gate_level = 0.99);

// Kalman-fuse matches, insert new landmarks, delete landmarks unseen for
// kappa consecutive frames. Deleted ids are never reused.
void update_map(LocalMap& map, const std::vector<ProjectedDetection>& detections,
                const AssociationResult& assoc, int kappa, double now);

}  // namespace swarm
