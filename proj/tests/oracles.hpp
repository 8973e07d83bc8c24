#pragma once

// Self-contained reference implementations used to cross-check library code.
// Deliberately independent of the algorithms under test: brute force,
// quadrature, and finite differences only.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Central finite difference of a scalar->vector function. The result is
// materialized (never an Eigen expression referencing temporaries).
template <typename F>
auto central_diff(F&& f, double t, double h = 1e-5) {
  using R = std::decay_t<decltype(f(t))>;
  const R hi = f(t + h);
  const R lo = f(t - h);
  return R((hi - lo) / (2.0 * h));
}

inline double central_diff_scalar(const std::function<double(double)>& f, double t,
                                  double h = 1e-5) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

// Exact distance from a point to the convex hull of a small vertex set, by
// Caratheodory-style enumeration: the projection lies in the convex hull of
// some vertex subset with nonnegative barycentric coordinates.
inline double distance_to_hull(const Eigen::Vector3d& p,
                               const std::vector<Eigen::Vector3d>& verts) {
  const int n = static_cast<int>(verts.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    // Solve least squares for barycentric coordinates on the affine hull.
    Eigen::MatrixXd A(4, m);
    Eigen::Vector4d b;
    b << p.x(), p.y(), p.z(), 1.0;
    for (int c = 0; c < m; ++c) {
      A.col(c).head<3>() = verts[idx[c]];
      A(3, c) = 1.0;
    }
    Eigen::VectorXd lam =
        A.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    if (lam.minCoeff() < -1e-9) continue;
    if (std::abs(lam.sum() - 1.0) > 1e-6) continue;
    Eigen::Vector3d proj = Eigen::Vector3d::Zero();
    for (int c = 0; c < m; ++c) proj += lam[c] * verts[idx[c]];
    best = std::min(best, (proj - p).norm());
  }
  return best;
}

inline double trapezoid(const std::function<double(double)>& f, double a, double b,
                        int n = 20000) {
  double acc = 0.5 * (f(a) + f(b));
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

// Chi-square CDF by Simpson integration of the density (dof >= 2). The
// substitution t = u^2 removes the sqrt singularity of the dof-3 density so
// the composite rule converges at full order.
inline double chi2_cdf(int dof, double x, int n = 20000) {
  if (x <= 0.0) return 0.0;
  const double k2 = 0.5 * dof;
  const double norm = std::pow(2.0, k2) * std::tgamma(k2);
  auto g = [&](double u) {
    const double t = u * u;
    return 2.0 * u * std::pow(t, k2 - 1.0) * std::exp(-0.5 * t) / norm;
  };
  if (n % 2) ++n;
  const double b = std::sqrt(x);
  const double h = b / n;
  double acc = g(0.0) + g(b);
  for (int i = 1; i < n; ++i) acc += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double chi2_quantile(int dof, double level) {
  double lo = 0.0, hi = 1.0;
  while (chi2_cdf(dof, hi, 20000) < level) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(dof, mid, 20000) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Brute-force assignment: minimum-cost perfect matching on an n x n cost
// matrix by permutation enumeration (n <= 8).
inline double brute_force_assignment(const Eigen::MatrixXd& cost,
                                     std::vector<int>* best_perm = nullptr) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg = perm;
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
    if (c < best) {
      best = c;
      arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best_perm) *best_perm = arg;
  return best;
}

// Exhaustive maximum-weight mutually-consistent subset (pairwise weights
// must be > 0 inside the subset; objective = sum of pairwise weights, ties
// broken toward larger subsets). For n <= ~20 nodes.
inline double brute_force_consistent_set(const Eigen::MatrixXd& w,
                                         std::vector<int>* best_set = nullptr) {
  const int n = static_cast<int>(w.rows());
  double best = 0.0;
  std::size_t best_size = 0;
  std::vector<int> arg;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(i);
    double sw = 0.0;
    bool ok = true;
    for (std::size_t a = 0; a < s.size() && ok; ++a)
      for (std::size_t b = a + 1; b < s.size() && ok; ++b) {
        if (w(s[a], s[b]) <= 0.0)
          ok = false;
        else
          sw += w(s[a], s[b]);
      }
    if (!ok) continue;
    if (sw > best + 1e-12 || (sw > best - 1e-12 && s.size() > best_size)) {
      best = sw;
      best_size = s.size();
      arg = s;
    }
  }
  if (best_set) *best_set = arg;
  return best;
}

}  // namespace oracle
