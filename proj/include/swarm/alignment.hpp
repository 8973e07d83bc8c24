#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/mapping.hpp"
#include "swarm/trajectory.hpp"

namespace swarm {

// A hypothesized correspondence between one landmark in each map.
struct AssociationCandidate {
  long id_i = 0;
  long id_j = 0;
};

struct ConsistencyGraph {
  std::vector<AssociationCandidate> nodes;
  Eigen::MatrixXd weights;  // symmetric, zero diagonal, zero for conflicts
};

struct AlignmentResult {
  Pose2 transform;  // X^{li}_{lj}: maps frame-j points into frame i
  std::vector<AssociationCandidate> inliers;
  std::vector<double> weights;
  double residual_rms = 0.0;
  double stamp = 0.0;
};

struct AlignmentConfig {
  double eps_c = 0.3;         // m, distance-consistency tolerance
  int min_inliers = 3;
  double cov_trace_gate = 1.0;  // suppress newborn/uncertain landmarks
  int max_candidates = 200;
  double min_delta = 0.2;     // s, recency clamp (one detector frame)
};

struct InsufficientOverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rigid transforms preserve intra-map distances, so a pair of true
// correspondences scores near 1: weight = max(0, 1 - s/eps_c) with
// s = | ||p_i(a)-p_i(b)|| - ||p_j(a)-p_j(b)|| |.
double consistency_edge(const AssociationCandidate& a, const AssociationCandidate& b,
                        const LocalMap& map_i, const LocalMap& map_j, double eps_c);

// All-pairs graph over the candidates; edges between candidates sharing a
// landmark on either side are zeroed (each landmark used at most once).
ConsistencyGraph build_consistency_graph(const std::vector<AssociationCandidate>& cands,
                                         const LocalMap& map_i, const LocalMap& map_j,
                                         double eps_c);

// Exact branch-and-bound maximum-weight mutually-consistent subset: every
// chosen pair must have positive edge weight; objective is the sum of
// pairwise weights, ties broken toward larger sets, then discovery order.
std::vector<int> max_consistent_set(const ConsistencyGraph& graph);

// (delta_i * delta_j)^-1 after clamping each delta below at min_delta.
double recency_weight(double delta_i, double delta_j, double min_delta);

// Weighted rigid registration: minimizes sum w_k ||X p_j,k - p_i,k||^2 over
// SE(2). Throws std::runtime_error on degenerate (collinear/coincident)
// geometry or fewer than 3 positive-weight pairs.
Pose2 weighted_arun(const std::vector<std::pair<Vec2, Vec2>>& pairs_ij,
                    const std::vector<double>& weights);

// Full pairwise pipeline: candidates -> consistency graph -> exact maximum
// consistent set -> recency weights -> weighted Arun. Throws
// InsufficientOverlapError when fewer than min_inliers survive.
AlignmentResult align(const LocalMap& map_i, const LocalMap& map_j, double now,
                      const AlignmentConfig& config = AlignmentConfig{});

// Transforms position control points in the ground plane (z unchanged) and
// shifts yaw control points by the rotation angle.
SplineTrajectory apply_alignment(const SplineTrajectory& traj, const Pose2& X);

}  // namespace swarm
