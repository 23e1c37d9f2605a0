#include "vdamf/uncertainty.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace vdamf {

namespace {

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& h, const Eigen::MatrixXd& kernel,
                         double sigma_p) {
  const auto n = h.rows();
  const double scale = h.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale) ||
      std::abs(h.determinant()) < 1e-12 * std::pow(scale, static_cast<double>(n))) {
    throw SingularHessian("pose Hessian is singular");
  }
  const Eigen::MatrixXd hinv = h.inverse();
  const Eigen::MatrixXd r = sigma_p * sigma_p * hinv * kernel * hinv.transpose();
  return 0.5 * (r + r.transpose());
}

Mat3 pose_block_frozen(const MatchEval& eval, double sigma_p) {
  Mat3 kernel = Mat3::Zero();
  for (const auto& g : eval.point_partials) kernel.noalias() += g * g.transpose();
  return sandwich(eval.hess_t(), kernel, sigma_p);
}

}  // namespace

void UncertaintyConfig::validate() const {
  if (!(sigma_p > 0.0) || !std::isfinite(sigma_p)) {
    throw InvalidInput("sigma_p must be positive");
  }
}

Mat3 pose_covariance(const MatchEval& eval, double sigma_p) {
  if (!(sigma_p > 0.0)) throw InvalidInput("sigma_p must be positive");
  if (eval.point_partials.empty()) throw InvalidInput("pose_covariance: no points");
  return pose_block_frozen(eval, sigma_p);
}

Mat3 pose_covariance(const MatchEval& eval, const UncertaintyConfig& cfg) {
  cfg.validate();
  if (eval.point_partials.empty()) throw InvalidInput("pose_covariance: no points");
  // The alpha-frozen size block is flat along hidden sides, so the frozen
  // derivative set only supports the pose-block model.
  if (!cfg.normalization_derivatives) return pose_block_frozen(eval, cfg.sigma_p);
  std::vector<int> idx = {kTx, kTy, kTheta};
  if (cfg.model == CovarianceModel::kMarginal) {
    if (!cfg.width_fixed) idx.push_back(kWidth);
    if (!cfg.length_fixed) idx.push_back(kLength);
  }
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) h(r, c) = eval.total_hess(idx[r], idx[c]);
  }
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd g(n, 2);
  for (const auto& p : eval.total_point_partials) {
    for (Eigen::Index r = 0; r < n; ++r) g.row(r) = p.row(idx[r]);
    kernel.noalias() += g * g.transpose();
  }
  return sandwich(h, kernel, cfg.sigma_p).topLeftCorner<3, 3>();
}

Mat3 fallback_covariance() {
  Mat3 r = Mat3::Zero();
  r(0, 0) = 1.0;
  r(1, 1) = 1.0;
  r(2, 2) = std::pow(deg2rad(30.0), 2);
  return r;
}

Measurement make_measurement(const FitResult& fit, const UncertaintyConfig& cfg) {
  Measurement m;
  m.state = fit.state;
  m.score = fit.score;
  m.sigma_p = cfg.sigma_p;
  m.phi = fit.phi;
  m.iterations = fit.iterations;
  m.converged = fit.converged;
  UncertaintyConfig local = cfg;
  local.width_fixed = cfg.width_fixed || fit.width_at_bound;
  local.length_fixed = cfg.length_fixed || fit.length_at_bound;
  try {
    m.pose_cov = pose_covariance(fit.eval, local);
    if (!m.pose_cov.allFinite()) throw SingularHessian("non-finite covariance");
  } catch (const SingularHessian&) {
    m.pose_cov = fallback_covariance();
    m.fallback = true;
  }
  return m;
}

}  // namespace vdamf
