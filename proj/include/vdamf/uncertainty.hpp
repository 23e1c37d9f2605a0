#pragma once

#include "vdamf/pose_optimizer.hpp"

namespace vdamf {

/// Which rectangle edges were observed, in the target frame (front = +x,
/// right = +y).
struct VisibleEdges {
  bool front = true;
  bool rear = true;
  bool right = true;
  bool left = true;

  bool all() const { return front && rear && right && left; }
  bool operator==(const VisibleEdges&) const = default;
};

struct Measurement {
  MatchState state;
  Mat3 pose_cov = Mat3::Identity();  // (tx, ty, theta)
  double score = 0.0;
  VisibleEdges visible_edges;
  double sigma_p = 0.05;
  double phi = 0.0;
  int iterations = 0;
  bool converged = false;
  /// True when the Hessian was singular and the fallback prior was used.
  bool fallback = false;
};

/// Raised when the pose Hessian is too close to singular to invert.
class SingularHessian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class CovarianceModel {
  /// Sandwich over the 3x3 pose block with the size held fixed.
  kPoseBlock,
  /// Sandwich over the pose and every size parameter that is not pinned at a
  /// bound, then the pose marginal.
  kMarginal,
};

struct UncertaintyConfig {
  double sigma_p = 0.05;
  CovarianceModel model = CovarianceModel::kMarginal;
  /// Use the derivatives that include alpha's dependence (matching the
  /// optimizer) instead of the alpha-frozen ones. The frozen set always uses
  /// the pose-block model.
  bool normalization_derivatives = true;
  /// Size parameters held fixed in the marginal model (active bounds).
  bool width_fixed = false;
  bool length_fixed = false;

  void validate() const;
};

/// sigma_p^2 H^-1 (sum_i G_i G_i^T) H^-1 with H the alpha-frozen pose Hessian
/// and G_i the alpha-frozen point partials. H is negative definite at a
/// maximum; the two inverses flank a PSD kernel so the sign cancels.
/// Throws SingularHessian when |det H| < 1e-12 * scale^3.
Mat3 pose_covariance(const MatchEval& eval, double sigma_p);

/// As above with a choice of derivative set and model.
Mat3 pose_covariance(const MatchEval& eval, const UncertaintyConfig& cfg);

/// Deliberately pessimistic prior: diag(1 m^2, 1 m^2, (30 deg)^2).
Mat3 fallback_covariance();

/// Packages a fit as a measurement, substituting the fallback covariance when
/// the Hessian is singular. Sizes pinned at a bound are held fixed. All edges
/// are marked visible.
Measurement make_measurement(const FitResult& fit, const UncertaintyConfig& cfg = {});

}  // namespace vdamf
