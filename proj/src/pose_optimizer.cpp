#include "vdamf/pose_optimizer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace vdamf {

void OptimizerConfig::validate() const {
  if (max_iterations <= 0 || max_lambda_retries <= 0) {
    throw InvalidInput("optimizer iteration limits must be positive");
  }
  if (!(lm_lambda_init > 0.0) || !(lm_lambda_up > 1.0) || !(lm_lambda_down > 0.0) ||
      !(lm_lambda_down < 1.0)) {
    throw InvalidInput("optimizer requires lambda_init > 0 and lambda_up > 1 > lambda_down > 0");
  }
  if (!(position_tol > 0.0) || !(angle_tol > 0.0) || !(min_pivot > 0.0)) {
    throw InvalidInput("optimizer tolerances must be positive");
  }
  const SizeBounds& b = size_bounds;
  if (!(b.w_min > 0.0) || !(b.l_min > 0.0) || !(b.w_max >= b.w_min) || !(b.l_max >= b.l_min)) {
    throw InvalidInput("invalid size bounds");
  }
}

namespace {

MatchState clamp_size(MatchState s, const SizeBounds& b) {
  s.w = std::clamp(s.w, b.w_min, b.w_max);
  s.l = std::clamp(s.l, b.l_min, b.l_max);
  s.theta = wrap_angle(s.theta);
  return s;
}

bool step_is_small(const MatchState& a, const MatchState& b, const OptimizerConfig& cfg) {
  const double lin = std::max({std::abs(a.tx - b.tx), std::abs(a.ty - b.ty), std::abs(a.w - b.w),
                               std::abs(a.l - b.l)});
  const double ang = std::abs(wrap_angle(a.theta - b.theta));
  return lin < cfg.position_tol && ang < cfg.angle_tol;
}

struct ViewSource {
  double phi = 0.0;
  std::optional<SensorOrigin> sensor;

  double at(const MatchState& s) const {
    return sensor ? viewing_angle(s.position(), *sensor) : phi;
  }
};

FitResult lm_climb(const Cluster& cluster, const MatchState& init, const ViewSource& view,
                   const OptimizerConfig& cfg, const FilterWeights& weights) {

  FitResult res;
  MatchState state = clamp_size(init, cfg.size_bounds);
  double phi = view.at(state);
  MatchEval ev = evaluate(cluster, state, phi, weights);
  double score = ev.value;
  res.score_history.push_back(score);
  res.min_system_eigenvalue = std::numeric_limits<double>::infinity();

  double lambda = cfg.lm_lambda_init;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.iterations = iter;
    const Vec5& g = cfg.normalization_derivatives ? ev.total_grad : ev.grad;
    const Mat5& h = cfg.normalization_derivatives ? ev.total_hess : ev.hess;
    const Mat5 a = -h;
    // Marquardt scaling, with the translation block scaled along the
    // target's own axes so the path does not depend on the world frame.
    const Mat2 rot = rotation(state.theta);
    const Mat2 local = rot.transpose() * h.topLeftCorner<2, 2>() * rot;
    Mat5 d = Mat5::Zero();
    d.topLeftCorner<2, 2>() = rot *
                              Vec2(std::max(std::abs(local(0, 0)), 1.0),
                                   std::max(std::abs(local(1, 1)), 1.0))
                                  .asDiagonal() *
                              rot.transpose();
    for (int k = kTheta; k < 5; ++k) d(k, k) = std::max(std::abs(h(k, k)), 1.0);

    bool accepted = false;
    bool small = false;
    for (int retry = 0; retry < cfg.max_lambda_retries; ++retry) {
      // Inflate lambda until the system is safely positive definite.
      Mat5 m;
      double min_eig = 0.0;
      for (int guard = 0; guard < 200; ++guard) {
        m = a;
        m += lambda * d;
        min_eig = Eigen::SelfAdjointEigenSolver<Mat5>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
        if (min_eig > cfg.min_pivot) break;
        lambda *= 2.0;
      }
      res.min_system_eigenvalue = std::min(res.min_system_eigenvalue, min_eig);

      const Vec5 delta = m.llt().solve(g);
      const MatchState cand = clamp_size(MatchState::from_vector(state.as_vector() + delta), cfg.size_bounds);
      if (step_is_small(cand, state, cfg)) {
        small = true;
        break;
      }
      const double cand_score = evaluate_value(cluster, cand, phi, weights);
      if (cand_score > score) {
        state = cand;
        score = cand_score;
        lambda = std::max(lambda * cfg.lm_lambda_down, 1e-12);
        accepted = true;
        break;
      }
      lambda *= cfg.lm_lambda_up;
    }

    if (small || !accepted) {
      res.converged = small;
      break;
    }
    res.score_history.push_back(score);
    phi = view.at(state);
    ev = evaluate(cluster, state, phi, weights);
    score = ev.value;
  }

  res.state = state;
  res.score = score;
  const SizeBounds& b = cfg.size_bounds;
  res.width_at_bound = state.w <= b.w_min || state.w >= b.w_max;
  res.length_at_bound = state.l <= b.l_min || state.l >= b.l_max;
  res.phi = phi;
  res.eval = std::move(ev);
  return res;
}

FitResult run_fit(const Cluster& cluster, const MatchState& init, const ViewSource& view,
                  const OptimizerConfig& cfg, const FilterWeights& weights) {
  if (cluster.empty()) throw InvalidInput("fit: empty cluster");
  init.validate();
  cfg.validate();
  FitResult res = lm_climb(cluster, init, view, cfg, weights);
  if (!cfg.enforce_length_axis || res.state.w <= res.state.l) return res;
  // Ended with the length axis across the vehicle: restart once from the same
  // rectangle described with the axes swapped and keep the better optimum.
  MatchState swapped = res.state;
  swapped.theta = wrap_angle(swapped.theta + kPi / 2);
  std::swap(swapped.w, swapped.l);
  FitResult alt = lm_climb(cluster, swapped, view, cfg, weights);
  alt.iterations += res.iterations;
  if (alt.score <= res.score) {
    res.iterations = alt.iterations;
    return res;
  }
  std::vector<double> history = res.score_history;
  history.insert(history.end(), alt.score_history.begin(), alt.score_history.end());
  alt.score_history = std::move(history);
  alt.min_system_eigenvalue = std::min(alt.min_system_eigenvalue, res.min_system_eigenvalue);
  return alt;
}

}  // namespace

MatchState initialize_state(const Cluster& cluster, double phi, const SizeBounds& bounds) {
  if (cluster.empty()) throw InvalidInput("initialize_state: empty cluster");
  const Vec2 c = cluster.bbox().center();
  const Vec2 ext = cluster.bbox().extent();
  MatchState s;
  s.tx = c.x();
  s.ty = c.y();
  double axis = 0.0;
  if (ext.x() >= ext.y()) {
    s.l = ext.x();
    s.w = ext.y();
  } else {
    axis = kPi / 2;
    s.l = ext.y();
    s.w = ext.x();
  }
  // The filter is symmetric under theta + pi; pick the heading toward the sensor.
  s.theta = std::cos(axis - phi) >= -1e-12 ? axis : wrap_angle(axis - kPi);
  s.w = std::clamp(s.w, bounds.w_min, bounds.w_max);
  s.l = std::clamp(s.l, bounds.l_min, bounds.l_max);
  if (s.w > s.l) std::swap(s.w, s.l);
  return s;
}

FitResult fit(const Cluster& cluster, const MatchState& init, double phi,
              const OptimizerConfig& cfg, const FilterWeights& weights) {
  return run_fit(cluster, init, ViewSource{phi, std::nullopt}, cfg, weights);
}

FitResult fit(const Cluster& cluster, const MatchState& init, const SensorOrigin& sensor,
              const OptimizerConfig& cfg, const FilterWeights& weights) {
  return run_fit(cluster, init, ViewSource{0.0, sensor}, cfg, weights);
}

}  // namespace vdamf
