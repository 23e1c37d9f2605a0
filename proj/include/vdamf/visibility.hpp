#pragma once

#include "vdamf/uncertainty.hpp"

#include <deque>

namespace vdamf {

struct VisibilityConfig {
  double loss_abs = 0.5;  // meters
  double loss_rel = 0.2;  // fraction of the robust dimension
  std::size_t min_history = 5;
  std::size_t history = 50;
  /// Apply the corner-anchored state offset in the tracker.
  bool anchor_enabled = true;
  /// Inflate the covariance of measurement directions tied to lost edges.
  bool mask_enabled = true;

  void validate() const;
};

/// Bounded histories of measured length and width with running medians.
class SizeMemory {
 public:
  explicit SizeMemory(std::size_t capacity = 50);

  void add(double length, double width);
  void add_length(double length);
  void add_width(double width);

  /// Appends a measurement, withholding a dimension whose edge was flagged
  /// lost so partial views do not drag the median down. After `capacity`
  /// consecutive withheld samples the dimension is accepted again, which lets
  /// the memory follow a genuine size change.
  void observe(double length, double width, bool length_lost, bool width_lost);

  std::size_t length_count() const { return lengths_.size(); }
  std::size_t width_count() const { return widths_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return lengths_.empty() && widths_.empty(); }

  /// Medians of the retained samples (the mean of the middle pair for even
  /// counts). Zero when empty.
  double robust_l() const;
  double robust_w() const;

  const std::deque<double>& length_samples() const { return lengths_; }
  const std::deque<double>& width_samples() const { return widths_; }

 private:
  std::size_t capacity_;
  std::deque<double> lengths_;
  std::deque<double> widths_;
  std::size_t withheld_l_ = 0;
  std::size_t withheld_w_ = 0;
};

double median(const std::deque<double>& values);

/// max(loss_abs, loss_rel * robust).
double loss_threshold(double robust, const VisibilityConfig& cfg);

/// Displacements of the four edge lines in the target frame.
struct EdgeFrameDelta {
  double dx_f = 0.0;
  double dx_r = 0.0;
  double dy_r = 0.0;
  double dy_l = 0.0;
};

struct CenterDelta {
  double dtx = 0.0;
  double dty = 0.0;
  double dl = 0.0;
  double dw = 0.0;
};

/// Maps (dx_f, dx_r, dy_r, dy_l) to the local center shift.
Eigen::Matrix<double, 2, 4> edge_to_center_matrix();

/// Center shift rotated into the world frame plus the size changes
/// dl = dx_f - dx_r and dw = dy_r - dy_l.
CenterDelta edge_deltas_to_center(const EdgeFrameDelta& delta, double t_theta);

/// Flags the edge farther from the sensor as lost on every dimension whose
/// measured size falls short of the robust size by more than the threshold.
/// All edges are visible until the memory holds min_history samples.
VisibleEdges detect_visibility_loss(const Measurement& meas, const SizeMemory& memory,
                                    const VisibilityConfig& cfg = {});

/// Offset from the measured-size center to the remembered-size center that
/// keeps the corner nearest the sensor fixed, in world coordinates. Only
/// dimensions with a lost edge contribute.
Vec2 anchor_correction(const Measurement& meas, const SizeMemory& memory,
                       const SensorOrigin& sensor);

/// Replaces the information carried by lost edges with the fallback prior.
/// In the target frame, a dimension with a lost edge has its center
/// coordinate decorrelated and its variance raised to at least the prior;
/// all other entries are untouched. Idempotent for a fixed flag set.
Mat3 mask_covariance(const Mat3& pose_cov, const VisibleEdges& visible, const MatchState& state);

}  // namespace vdamf
