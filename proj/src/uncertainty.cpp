#include "swarm/uncertainty.hpp"

#include <cmath>
#include <stdexcept>

namespace swarm {

namespace {

// CDF of chi-square with 3 dof: erf(sqrt(x/2)) - sqrt(2x/pi) exp(-x/2).
double chi2_cdf_dof3(double x) {
  if (x <= 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * x)) -
         std::sqrt(2.0 * x / M_PI) * std::exp(-0.5 * x);
}

}  // namespace

double chi_square_quantile(int dof, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("chi_square_quantile: level must be in (0,1)");
  if (dof == 2) return -2.0 * std::log1p(-level);
  if (dof == 3) {
    double lo = 0.0, hi = 1.0;
    while (chi2_cdf_dof3(hi) < level) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (chi2_cdf_dof3(mid) < level ? lo : hi) = mid;
      if (hi - lo < 1e-13 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
  }
  throw std::domain_error("chi_square_quantile: only dof 2 and 3 supported");
}

void ObstacleBelief::validate() const {
  if (!mean.allFinite() || !covariance.allFinite())
    throw std::invalid_argument("ObstacleBelief: non-finite entries");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("ObstacleBelief: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat9> es(covariance);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("ObstacleBelief: covariance not PSD");
}

void FovModel::validate() const {
  if (!(opening_angle > 0.0 && opening_angle < 2.0 * M_PI))
    throw std::invalid_argument("FovModel: opening angle must be in (0, 2pi)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("FovModel: epsilon must be > 0");
  if ((R_max - R_max.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("FovModel: R_max not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(R_max);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("FovModel: R_max not PSD");
}

LinearModel LinearModel::constant_acceleration(double dt) {
  // A is nilpotent, so exp(A dt) truncates exactly.
  LinearModel m;
  m.F.setIdentity();
  m.F.block<3, 3>(0, 3) = dt * Mat3::Identity();
  m.F.block<3, 3>(3, 6) = dt * Mat3::Identity();
  m.F.block<3, 3>(0, 6) = 0.5 * dt * dt * Mat3::Identity();
  m.H.setZero();
  m.H.block<3, 3>(0, 0) = Mat3::Identity();
  return m;
}

double fov_score(const Vec3& p_camera, double theta) {
  const double norm = p_camera.norm();
  if (norm <= 0.0) throw std::domain_error("fov_score: zero-norm point");
  return -std::cos(0.5 * theta) + p_camera.z() / norm;
}

Mat3 fov_noise(double f, const FovModel& fov, bool* clamped) {
  if (clamped) *clamped = false;
  const double den = 1.0 + f + fov.epsilon;
  double mult;
  if (den <= 0.0) {
    mult = fov.max_multiplier;
    if (clamped) *clamped = true;
  } else {
    mult = (1.0 - f) / den;
    if (mult > fov.max_multiplier) {
      mult = fov.max_multiplier;
      if (clamped) *clamped = true;
    }
    if (mult < 0.0) mult = 0.0;  // f > 1 cannot occur for unit directions
  }
  return mult * fov.R_max;
}

Mat9 propagate_open_loop(const Mat9& P, const Mat9& F) {
  return symmetrized(F * P * F.transpose());
}

Mat9 symmetrized(const Mat9& P) { return 0.5 * (P + P.transpose()); }

StepResult propagate_step(const ObstacleBelief& belief, const LinearModel& model,
                          const Pose3& camera, const FovModel& fov) {
  StepResult out;
  out.belief.mean = model.F * belief.mean;

  const Mat9 P_pred = symmetrized(model.F * belief.covariance * model.F.transpose());
  const Vec3 p_cam = apply(inverse(camera), out.belief.position());

  Mat3 R;
  if (p_cam.norm() < 1e-9) {
    // Obstacle collocated with the camera: treat as unobservable this step.
    R = fov.max_multiplier * fov.R_max;
    out.noise_clamped = true;
  } else {
    R = fov_noise(fov_score(p_cam, fov.opening_angle), fov, &out.noise_clamped);
  }

  const Mat3 S = model.H * P_pred * model.H.transpose() + R;
  Eigen::FullPivLU<Mat3> lu(S);
  if (!lu.isInvertible()) {
    out.belief.covariance = P_pred;
    out.open_loop_fallback = true;
    return out;
  }
  const Eigen::Matrix<double, 9, 3> K = P_pred * model.H.transpose() * lu.inverse();
  out.belief.covariance = symmetrized((Mat9::Identity() - K * model.H) * P_pred);
  return out;
}

std::vector<ObstacleBelief> propagate_horizon(const ObstacleBelief& belief,
                                              const LinearModel& model,
                                              const SplineTrajectory& ego,
                                              double dt, int N,
                                              const Pose3& camera_mount,
                                              const FovModel& fov) {
  if (N < 1) throw std::invalid_argument("propagate_horizon: N >= 1 required");
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_horizon: dt must be > 0");
  std::vector<ObstacleBelief> out;
  out.reserve(N);
  ObstacleBelief cur = belief;
  for (int k = 1; k <= N; ++k) {
    const double t = std::min(ego.t_in() + k * dt, ego.t_f());
    const auto s = ego.evaluate(t);
    const Pose3 camera = compose(pose3_from_planar(s.position, s.yaw), camera_mount);
    cur = propagate_step(cur, model, camera, fov).belief;
    out.push_back(cur);
  }
  return out;
}

std::vector<MotionUncertainty> propagate_motion_uncertainty(
    const std::vector<Pose3>& cameras, const std::vector<TimedPoint>& p_traj,
    const Mat9& P0, const LinearModel& model, const FovModel& fov, double t0,
    double dt) {
  if (p_traj.empty())
    throw std::invalid_argument("propagate_motion_uncertainty: empty p_traj");
  std::vector<MotionUncertainty> out;
  out.reserve(cameras.size());
  Mat9 P = P0;
  for (std::size_t k = 1; k <= cameras.size(); ++k) {
    const Pose3& camera = cameras[k - 1];
    const double target_t = t0 + static_cast<double>(k) * dt;

    // First not-yet-passed trajectory sample, skipping points that sit on
    // top of the camera (no meaningful bearing). If every remaining sample
    // is that close the agent occupies the space already: measure exactly.
    const Pose3 cam_inv = inverse(camera);
    const TimedPoint* pick = nullptr;
    for (std::size_t i = 0; i < p_traj.size(); ++i) {
      if (p_traj[i].t < target_t && i + 1 < p_traj.size()) continue;
      if (apply(cam_inv, p_traj[i].p).norm() >= 1e-2) {
        pick = &p_traj[i];
        break;
      }
    }

    const Mat9 P_pred = symmetrized(model.F * P * model.F.transpose());
    Mat3 R;
    if (pick == nullptr) {
      R = Mat3::Zero();
    } else {
      R = fov_noise(fov_score(apply(cam_inv, pick->p), fov.opening_angle), fov);
    }
    const Mat3 S = model.H * P_pred * model.H.transpose() + R;
    Eigen::FullPivLU<Mat3> lu(S);
    if (!lu.isInvertible()) {
      P = P_pred;
    } else {
      const Eigen::Matrix<double, 9, 3> K = P_pred * model.H.transpose() * lu.inverse();
      P = symmetrized((Mat9::Identity() - K * model.H) * P_pred);
    }
    MotionUncertainty mu;
    mu.covariance = P;
    out.push_back(mu);
  }
  return out;
}

Vec3 velocity_bound(const Mat3& P_pos, const Vec3& v_limit) {
  const Vec3 d = P_pos.diagonal();
  if (!(d.minCoeff() > 0.0))
    throw std::domain_error("velocity_bound: non-positive covariance diagonal");
  return v_limit.cwiseQuotient(d.cwiseSqrt());
}

Ellipsoid confidence_ellipsoid(const Mat3& P_pos, double level) {
  if ((P_pos - P_pos.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::domain_error("confidence_ellipsoid: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(P_pos);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::domain_error("confidence_ellipsoid: covariance not PSD");
  const double q = chi_square_quantile(3, level);
  Ellipsoid e;
  e.axes = es.eigenvectors();
  e.semi_axes = (q * es.eigenvalues().cwiseMax(0.0)).cwiseSqrt();
  return e;
}

}  // namespace swarm
