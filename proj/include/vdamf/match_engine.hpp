#pragma once

#include "vdamf/common.hpp"
#include "vdamf/filter_bank.hpp"
#include "vdamf/scan_model.hpp"

#include <span>
#include <vector>

namespace vdamf {

using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat52 = Eigen::Matrix<double, 5, 2>;

/// Mass of N(x_m, sigma) above the step at x_a: 0.5 * (1 + erf((x_m - x_a) / (sqrt(2) sigma))).
double step_integral(double x_a, double x_m, double sigma);

/// Integral of an isotropic Gaussian at `m` over `rect`, times rect.height.
double rect_integral(const Rect& rect, const Vec2& m, double sigma);

struct LocalPoints {
  std::vector<Vec2> coords;
  Vec2 origin = Vec2::Zero();
  double angle = 0.0;
};

/// Rotates points into the filter frame: R(-t_theta) (m_i - m0).
LocalPoints to_filter_frame(std::span<const Vec2> means, const Vec2& m0, double t_theta);

/// Response of the normalized filter and its derivatives at one state.
///
/// `grad` / `hess` hold the exact derivatives with alpha held fixed at its
/// current value. `total_grad` / `total_hess` additionally carry alpha's
/// dependence on (theta, w, l); they are what the optimizer climbs.
/// Variable order everywhere is (tx, ty, theta, w, l).
struct MatchEval {
  double value = 0.0;
  double alpha = 0.0;
  double raw = 0.0;  // value / alpha
  Vec5 grad = Vec5::Zero();
  Mat5 hess = Mat5::Zero();
  Vec5 total_grad = Vec5::Zero();
  Mat5 total_hess = Mat5::Zero();
  /// d(grad_t M_i)/d(p_i): one 3x2 matrix per point, columns are x and y.
  std::vector<Mat32> point_partials;
  /// d(total_grad)/d(p_i): all five parameters, including alpha's dependence.
  std::vector<Mat52> total_point_partials;
  FilterSpec filter;

  Vec3 grad_t() const { return grad.head<3>(); }
  Mat3 hess_t() const { return hess.topLeftCorner<3, 3>(); }
  Vec2 grad_w() const { return grad.tail<2>(); }
};

/// Closed-form response with derivatives. Points are processed in parallel
/// when the cluster is large; the reduction order is fixed so the result is
/// bit-identical to evaluate_serial.
MatchEval evaluate(const Cluster& cluster, const MatchState& state, double phi,
                   const FilterWeights& weights = {});

/// Single-threaded reference implementation of evaluate.
MatchEval evaluate_serial(const Cluster& cluster, const MatchState& state, double phi,
                          const FilterWeights& weights = {});

/// Response only, without derivatives.
double evaluate_value(const Cluster& cluster, const MatchState& state, double phi,
                      const FilterWeights& weights = {});

/// Response only, with a caller-supplied alpha (used to freeze normalization).
double evaluate_value_with_alpha(std::span<const Vec2> means, double sigma,
                                 const MatchState& state, const FilterSpec& filter, double alpha);

/// Clusters at or above this size are evaluated with OpenMP.
inline constexpr std::size_t kParallelPointThreshold = 256;

}  // namespace vdamf
