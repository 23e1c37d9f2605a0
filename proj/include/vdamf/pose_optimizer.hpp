#pragma once

#include "vdamf/match_engine.hpp"

#include <optional>
#include <vector>

namespace vdamf {

struct SizeBounds {
  double w_min = 0.8;
  double w_max = 3.5;
  double l_min = 1.0;
  double l_max = 12.0;
};

struct OptimizerConfig {
  int max_iterations = 30;
  int max_lambda_retries = 40;
  double lm_lambda_init = 1e-3;
  double lm_lambda_up = 10.0;
  double lm_lambda_down = 0.1;
  double position_tol = 1e-3;  // meters, applies to tx, ty, w, l
  double angle_tol = 1e-3;     // radians
  /// Smallest eigenvalue the regularized system must exceed before a solve.
  double min_pivot = 1e-9;
  SizeBounds size_bounds;
  /// Climb the total derivatives (including alpha's dependence on size and
  /// beta) rather than the alpha-frozen ones.
  bool normalization_derivatives = true;
  /// If the fit ends with w > l, restart once with the axes swapped and keep
  /// whichever optimum scores higher. Off by default: head-on views
  /// legitimately measure w > l. The tracker enables it when seeding tracks.
  bool enforce_length_axis = false;

  void validate() const;
};

struct FitResult {
  MatchState state;
  double score = 0.0;
  int iterations = 0;
  bool converged = false;
  double phi = 0.0;
  MatchEval eval;
  /// Score after initialization and after every accepted step.
  std::vector<double> score_history;
  /// Whether w / l ended on a size bound (an active constraint).
  bool width_at_bound = false;
  bool length_at_bound = false;
  /// Smallest eigenvalue of any regularized system that was solved.
  double min_system_eigenvalue = 0.0;
};

/// Starting state from the cluster's bounding box: centered on the box, length
/// along its longer side, size clamped to bounds, and of the two headings
/// along that axis the one facing the sensor.
MatchState initialize_state(const Cluster& cluster, double phi, const SizeBounds& bounds = {});

/// Maximizes the matched-filter response with the viewing angle held at phi.
FitResult fit(const Cluster& cluster, const MatchState& init, double phi,
              const OptimizerConfig& cfg = {}, const FilterWeights& weights = {});

/// As above, but the viewing angle is re-derived from the current (tx, ty)
/// after each accepted step.
FitResult fit(const Cluster& cluster, const MatchState& init, const SensorOrigin& sensor,
              const OptimizerConfig& cfg = {}, const FilterWeights& weights = {});

}  // namespace vdamf
