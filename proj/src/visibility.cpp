#include "vdamf/visibility.hpp"

#include <algorithm>
#include <vector>

namespace vdamf {

void VisibilityConfig::validate() const {
  if (!(loss_abs >= 0.0) || !(loss_rel >= 0.0)) {
    throw InvalidInput("visibility loss thresholds must be nonnegative");
  }
  if (history == 0 || min_history > history) {
    throw InvalidInput("visibility history must be positive and at least min_history");
  }
}

SizeMemory::SizeMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("size memory capacity must be positive");
}

namespace {

void push_bounded(std::deque<double>& q, double v, std::size_t cap) {
  if (!std::isfinite(v)) throw InvalidInput("size memory samples must be finite");
  q.push_back(v);
  while (q.size() > cap) q.pop_front();
}

}  // namespace

void SizeMemory::add_length(double length) { push_bounded(lengths_, length, capacity_); }
void SizeMemory::add_width(double width) { push_bounded(widths_, width, capacity_); }

void SizeMemory::add(double length, double width) {
  add_length(length);
  add_width(width);
}

void SizeMemory::observe(double length, double width, bool length_lost, bool width_lost) {
  if (length_lost && withheld_l_ < capacity_) {
    ++withheld_l_;
  } else {
    add_length(length);
    withheld_l_ = 0;
  }
  if (width_lost && withheld_w_ < capacity_) {
    ++withheld_w_;
  } else {
    add_width(width);
    withheld_w_ = 0;
  }
}

double median(const std::deque<double>& values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double SizeMemory::robust_l() const { return median(lengths_); }
double SizeMemory::robust_w() const { return median(widths_); }

double loss_threshold(double robust, const VisibilityConfig& cfg) {
  return std::max(cfg.loss_abs, cfg.loss_rel * robust);
}

Eigen::Matrix<double, 2, 4> edge_to_center_matrix() {
  Eigen::Matrix<double, 2, 4> m;
  m << 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5;
  return m;
}

CenterDelta edge_deltas_to_center(const EdgeFrameDelta& d, double t_theta) {
  const Eigen::Vector4d e(d.dx_f, d.dx_r, d.dy_r, d.dy_l);
  const Vec2 world = rotation(t_theta) * (edge_to_center_matrix() * e);
  return {world.x(), world.y(), d.dx_f - d.dx_r, d.dy_r - d.dy_l};
}

VisibleEdges detect_visibility_loss(const Measurement& meas, const SizeMemory& memory,
                                    const VisibilityConfig& cfg) {
  cfg.validate();
  VisibleEdges v;
  // Sensor direction in the target frame is (cos beta, -sin beta).
  const double beta = wrap_angle(meas.state.theta - meas.phi);
  const double rl = memory.robust_l();
  const double rw = memory.robust_w();
  if (memory.length_count() >= cfg.min_history && rl - meas.state.l > loss_threshold(rl, cfg)) {
    if (std::cos(beta) > 0.0) {
      v.rear = false;
    } else {
      v.front = false;
    }
  }
  if (memory.width_count() >= cfg.min_history && rw - meas.state.w > loss_threshold(rw, cfg)) {
    if (-std::sin(beta) > 0.0) {
      v.left = false;
    } else {
      v.right = false;
    }
  }
  return v;
}

Vec2 anchor_correction(const Measurement& meas, const SizeMemory& memory,
                       const SensorOrigin& sensor) {
  const VisibleEdges& v = meas.visible_edges;
  const bool lost_l = !v.front || !v.rear;
  const bool lost_w = !v.right || !v.left;
  if (!lost_l && !lost_w) return Vec2::Zero();
  const Vec2 local = rotation(-meas.state.theta) * (sensor.planar() - meas.state.position());
  const double sx = local.x() >= 0.0 ? 1.0 : -1.0;
  const double sy = local.y() >= 0.0 ? 1.0 : -1.0;
  Vec2 off = Vec2::Zero();
  if (lost_l && memory.length_count() > 0) off.x() = -sx * 0.5 * (memory.robust_l() - meas.state.l);
  if (lost_w && memory.width_count() > 0) off.y() = -sy * 0.5 * (memory.robust_w() - meas.state.w);
  return rotation(meas.state.theta) * off;
}

Mat3 mask_covariance(const Mat3& pose_cov, const VisibleEdges& visible, const MatchState& state) {
  const bool lost_x = !visible.front || !visible.rear;
  const bool lost_y = !visible.right || !visible.left;
  if (!lost_x && !lost_y) return pose_cov;
  Mat3 t = Mat3::Identity();
  t.topLeftCorner<2, 2>() = rotation(-state.theta);
  Mat3 local = t * pose_cov * t.transpose();
  const double prior = fallback_covariance()(0, 0);
  for (int k : {0, 1}) {
    if ((k == 0 && !lost_x) || (k == 1 && !lost_y)) continue;
    const double var = std::max(local(k, k), prior);
    local.row(k).setZero();
    local.col(k).setZero();
    local(k, k) = var;
  }
  Mat3 out = t.transpose() * local * t;
  return 0.5 * (out + out.transpose());
}

}  // namespace vdamf
