#pragma once

#include "vdamf/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace vdamf {

/// Pose (tx, ty, theta) and size (w, l) of the matched filter. theta is the
/// direction of the length axis; the filter itself is symmetric under theta + pi.
struct MatchState {
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;
  double w = 1.8;
  double l = 4.5;

  Vec5 as_vector() const { return (Vec5() << tx, ty, theta, w, l).finished(); }
  static MatchState from_vector(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  Vec2 position() const { return {tx, ty}; }

  /// Throws InvalidInput unless finite with w > 0 and l > 0.
  void validate() const;
};

/// Index of each optimization variable inside Vec5 gradients and Hessians.
enum StateIndex : int { kTx = 0, kTy = 1, kTheta = 2, kWidth = 3, kLength = 4 };

/// Axis-aligned rectangle in the filter frame (x along vehicle length) with
/// uniform height.
struct Rect {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
  double height = 0.0;

  double area() const { return (xmax - xmin) * (ymax - ymin); }
};

enum class RegionKind { kSurround, kInterior, kSideEdge, kEndEdge };

/// A rectangle bound expressed as c0 + cw * w + cl * l for the current
/// discrete filter layout.
struct AffineBound {
  double c0 = 0.0;
  double cw = 0.0;
  double cl = 0.0;

  double at(double w, double l) const { return c0 + cw * w + cl * l; }
};

/// One rectangle of the filter plus its sensitivities to the state.
struct FilterRegion {
  RegionKind kind = RegionKind::kInterior;
  Rect rect;
  std::array<AffineBound, 4> bounds;  // xmin, xmax, ymin, ymax
  double dheight_dbeta = 0.0;
  double d2height_dbeta2 = 0.0;
};

/// Hand-chosen region layout. Defaults are the published filter; every value
/// can be overridden from a config file.
struct FilterWeights {
  double surround_weight = -0.25;
  double interior_weight = 0.35;  // net +0.10 on top of the surround
  double side_edge_weight = 1.0;  // multiplies |sin(beta)|
  double end_edge_weight = 1.0;   // multiplies |cos(beta)|
  double surround_length_margin = 1.5;
  double surround_width_margin = 1.0;
  double side_edge_depth = 0.6;
  double end_edge_depth = 0.8;
  double edge_epsilon = 1e-3;

  /// Same layout with every region height multiplied by k.
  FilterWeights scaled(double k) const;
};

struct FilterSpec {
  std::vector<FilterRegion> regions;
  double beta = 0.0;
  double alpha = 1.0;
  double phi = 0.0;

  std::vector<Rect> rects() const;
  const FilterRegion* find(RegionKind kind) const;
  /// Net (un-normalized) filter value at a filter-frame point.
  double value_at(double x, double y) const;
};

/// Builds the view-dependent filter for a state and viewing angle phi.
FilterSpec build_filter(const MatchState& state, double phi, const FilterWeights& weights = {});

/// alpha = 1 / sqrt(integral of s^2), computed exactly over the arrangement of
/// rectangle boundaries. Throws InvalidInput when the integral is zero.
double normalize_filter(std::span<const Rect> rects);

/// Integral of s^2 by summing pairwise overlap areas; an independent route to
/// the same quantity as the arrangement decomposition.
double filter_energy_pairwise(std::span<const Rect> rects);

/// Derivatives of alpha with respect to the 5-vector (tx, ty, theta, w, l),
/// for the discrete layout of `spec`. Only theta, w and l entries are nonzero.
struct NormalizationSensitivity {
  double energy = 0.0;
  double alpha = 0.0;
  Vec5 alpha_grad = Vec5::Zero();
  Mat5 alpha_hess = Mat5::Zero();
};

NormalizationSensitivity normalization_sensitivity(const FilterSpec& spec);

}  // namespace vdamf
