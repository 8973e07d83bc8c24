#include "swarm/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace swarm {

namespace {

const Landmark& must_find(const LocalMap& map, long id, const char* which) {
  const Landmark* lm = map.find(id);
  if (!lm)
    throw std::invalid_argument(std::string("alignment: candidate references a "
                                            "missing landmark in map ") +
                                which);
  return *lm;
}

// Coarse signature of a landmark's surroundings: histogram of distances to
// the other landmarks of its own map. Used only to rank candidates when the
// cross product exceeds the configured cap.
Eigen::VectorXd distance_histogram(const LocalMap& map, const Landmark& lm) {
  constexpr int kBins = 40;
  constexpr double kBinWidth = 0.5;  // m
  Eigen::VectorXd h = Eigen::VectorXd::Zero(kBins);
  for (const auto& other : map.landmarks) {
    if (other.id == lm.id) continue;
    const int b = std::min(kBins - 1, static_cast<int>((other.position - lm.position).norm() / kBinWidth));
    h[b] += 1.0;
  }
  return h;
}

struct BranchAndBound {
  const Eigen::MatrixXd& w;
  int n;
  std::vector<int> best;
  double best_w = 0.0;
  std::vector<int> cur;
  double cur_w = 0.0;

  explicit BranchAndBound(const Eigen::MatrixXd& weights)
      : w(weights), n(static_cast<int>(weights.rows())) {}

  bool better(double cand_w, std::size_t cand_size) const {
    if (cand_w > best_w + 1e-12) return true;
    return cand_w > best_w - 1e-12 && cand_size > best.size();
  }

  void expand(const std::vector<int>& cand) {
    if (better(cur_w, cur.size())) {
      best = cur;
      best_w = cur_w;
    }
    if (cand.empty()) return;

    // Optimistic bound: everything in cand joins.
    double bound = cur_w;
    for (std::size_t a = 0; a < cand.size(); ++a) {
      for (int u : cur) bound += w(cand[a], u);
      for (std::size_t b = a + 1; b < cand.size(); ++b)
        bound += std::max(0.0, w(cand[a], cand[b]));
    }
    if (!better(bound, cur.size() + cand.size())) return;

    for (std::size_t a = 0; a < cand.size(); ++a) {
      const int v = cand[a];
      std::vector<int> next;
      next.reserve(cand.size() - a - 1);
      for (std::size_t b = a + 1; b < cand.size(); ++b)
        if (w(v, cand[b]) > 0.0) next.push_back(cand[b]);
      double gain = 0.0;
      for (int u : cur) gain += w(v, u);
      cur.push_back(v);
      cur_w += gain;
      expand(next);
      cur.pop_back();
      cur_w -= gain;
    }
  }
};

}  // namespace

double consistency_edge(const AssociationCandidate& a, const AssociationCandidate& b,
                        const LocalMap& map_i, const LocalMap& map_j, double eps_c) {
  const Vec2 ia = must_find(map_i, a.id_i, "i").position;
  const Vec2 ib = must_find(map_i, b.id_i, "i").position;
  const Vec2 ja = must_find(map_j, a.id_j, "j").position;
  const Vec2 jb = must_find(map_j, b.id_j, "j").position;
  const double s = std::abs((ia - ib).norm() - (ja - jb).norm());
  return std::max(0.0, 1.0 - s / eps_c);
}

ConsistencyGraph build_consistency_graph(const std::vector<AssociationCandidate>& cands,
                                         const LocalMap& map_i, const LocalMap& map_j,
                                         double eps_c) {
  ConsistencyGraph g;
  g.nodes = cands;
  const int n = static_cast<int>(cands.size());
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool conflict = cands[a].id_i == cands[b].id_i ||
                            cands[a].id_j == cands[b].id_j;
      const double wv =
          conflict ? 0.0 : consistency_edge(cands[a], cands[b], map_i, map_j, eps_c);
      g.weights(a, b) = g.weights(b, a) = wv;
    }
  }
  return g;
}

std::vector<int> max_consistent_set(const ConsistencyGraph& graph) {
  const int n = static_cast<int>(graph.nodes.size());
  if (n == 0) return {};

  // Order nodes by descending incident weight for stronger pruning; the
  // search itself is exact.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd incident = graph.weights.rowwise().sum();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return incident[a] > incident[b]; });

  BranchAndBound bb(graph.weights);
  bb.expand(order);
  std::sort(bb.best.begin(), bb.best.end());
  return bb.best;
}

double recency_weight(double delta_i, double delta_j, double min_delta) {
  const double di = std::max(delta_i, min_delta);
  const double dj = std::max(delta_j, min_delta);
  if (!(di > 0.0) || !(dj > 0.0))
    throw std::domain_error("recency_weight: non-positive delta after clamping");
  return 1.0 / (di * dj);
}

Pose2 weighted_arun(const std::vector<std::pair<Vec2, Vec2>>& pairs_ij,
                    const std::vector<double>& weights) {
  if (pairs_ij.size() != weights.size())
    throw std::invalid_argument("weighted_arun: size mismatch");
  double wsum = 0.0;
  int positive = 0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weighted_arun: negative weight");
    if (w > 0.0) ++positive;
    wsum += w;
  }
  if (positive < 3)
    throw std::runtime_error("weighted_arun: need at least 3 positive-weight pairs");

  Vec2 ci = Vec2::Zero(), cj = Vec2::Zero();
  for (std::size_t k = 0; k < pairs_ij.size(); ++k) {
    ci += weights[k] * pairs_ij[k].first;
    cj += weights[k] * pairs_ij[k].second;
  }
  ci /= wsum;
  cj /= wsum;

  Mat2 H = Mat2::Zero();
  for (std::size_t k = 0; k < pairs_ij.size(); ++k)
    H += weights[k] * (pairs_ij[k].second - cj) * (pairs_ij[k].first - ci).transpose();

  Eigen::JacobiSVD<Mat2> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s0 = svd.singularValues()(0);
  const double s1 = svd.singularValues()(1);
  if (s1 <= 1e-12 + 1e-9 * s0)
    throw std::runtime_error("weighted_arun: degenerate geometry (collinear points)");

  Mat2 R = svd.matrixV() * svd.matrixU().transpose();
  if (R.determinant() < 0.0) {
    Mat2 V = svd.matrixV();
    V.col(1) *= -1.0;
    R = V * svd.matrixU().transpose();
  }
  const Vec2 t = ci - R * cj;
  return Pose2{t.x(), t.y(), std::atan2(R(1, 0), R(0, 0))};
}

AlignmentResult align(const LocalMap& map_i, const LocalMap& map_j, double now,
                      const AlignmentConfig& config) {
  if (map_i.landmarks.empty() || map_j.landmarks.empty())
    throw InsufficientOverlapError("align: empty map");

  std::vector<AssociationCandidate> cands;
  for (const auto& li : map_i.landmarks) {
    if (li.covariance.trace() > config.cov_trace_gate) continue;
    for (const auto& lj : map_j.landmarks) {
      if (lj.covariance.trace() > config.cov_trace_gate) continue;
      cands.push_back({li.id, lj.id});
    }
  }

  if (static_cast<int>(cands.size()) > config.max_candidates) {
    // Rank by similarity of the landmarks' distance histograms.
    std::vector<std::pair<double, int>> scored(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto& li = must_find(map_i, cands[k].id_i, "i");
      const auto& lj = must_find(map_j, cands[k].id_j, "j");
      const Eigen::VectorXd hi = distance_histogram(map_i, li);
      const Eigen::VectorXd hj = distance_histogram(map_j, lj);
      scored[k] = {hi.cwiseMin(hj).sum(), static_cast<int>(k)};
    }
    std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      const auto& ca = cands[a.second];
      const auto& cb = cands[b.second];
      return std::tie(ca.id_i, ca.id_j) < std::tie(cb.id_i, cb.id_j);
    });
    std::vector<AssociationCandidate> kept;
    kept.reserve(config.max_candidates);
    for (int k = 0; k < config.max_candidates; ++k) kept.push_back(cands[scored[k].second]);
    cands = std::move(kept);
  }

  const ConsistencyGraph graph =
      build_consistency_graph(cands, map_i, map_j, config.eps_c);
  const std::vector<int> chosen = max_consistent_set(graph);
  if (static_cast<int>(chosen.size()) < config.min_inliers)
    throw InsufficientOverlapError("align: fewer inliers than required");

  AlignmentResult result;
  result.stamp = now;
  std::vector<std::pair<Vec2, Vec2>> pairs;
  for (int idx : chosen) {
    const auto& c = graph.nodes[idx];
    const auto& li = must_find(map_i, c.id_i, "i");
    const auto& lj = must_find(map_j, c.id_j, "j");
    result.inliers.push_back(c);
    result.weights.push_back(recency_weight(now - li.last_seen, now - lj.last_seen,
                                            config.min_delta));
    pairs.emplace_back(li.position, lj.position);
  }

  result.transform = weighted_arun(pairs, result.weights);

  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Vec2 r = apply(result.transform, pairs[k].second) - pairs[k].first;
    num += result.weights[k] * r.squaredNorm();
    den += result.weights[k];
  }
  result.residual_rms = std::sqrt(num / den);
  return result;
}

SplineTrajectory apply_alignment(const SplineTrajectory& traj, const Pose2& X) {
  std::vector<Vec3> pos;
  pos.reserve(traj.position_control_points().size());
  for (const auto& p : traj.position_control_points()) {
    const Vec2 xy = apply(X, Vec2(p.x(), p.y()));
    pos.emplace_back(xy.x(), xy.y(), p.z());
  }
  std::vector<double> yaw;
  yaw.reserve(traj.yaw_control_points().size());
  for (double y : traj.yaw_control_points()) yaw.push_back(y + X.yaw);
  return SplineTrajectory(std::move(pos), std::move(yaw), traj.t_in(), traj.t_f());
}

}  // namespace swarm
