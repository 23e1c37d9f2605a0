#pragma once

#include "vdamf/common.hpp"

#include <span>
#include <vector>

namespace vdamf {

struct ScanPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int frame_id = 0;
};

struct SensorOrigin {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 planar() const { return {x, y}; }
};

struct BoundingBox2 {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  Vec2 center() const { return 0.5 * (min + max); }
  Vec2 extent() const { return max - min; }
};

/// Label value used for ground hits in synthetic frames.
inline constexpr int kGroundLabel = -1;

struct Frame {
  int frame_id = 0;
  double timestamp = 0.0;
  SensorOrigin sensor;
  std::vector<ScanPoint> points;
  /// Optional per-point labels (object id, or kGroundLabel). Empty for real data.
  std::vector<int> labels;
};

/// A group of above-ground hits, projected into the plane as a Gaussian mixture
/// with one isotropic component of std `sigma` per hit.
class Cluster {
 public:
  Cluster() = default;
  Cluster(std::vector<ScanPoint> points, double sigma);

  const std::vector<ScanPoint>& points() const { return points_; }
  const std::vector<Vec2>& planar_means() const { return means_; }
  double sigma() const { return sigma_; }
  const BoundingBox2& bbox() const { return bbox_; }
  std::size_t size() const { return means_.size(); }
  bool empty() const { return means_.empty(); }

  /// Unweighted mean of the planar means.
  Vec2 centroid() const;

  /// Concatenates several clusters into one (sigma taken from the first).
  static Cluster merge(std::span<const Cluster* const> parts);

 private:
  std::vector<ScanPoint> points_;
  std::vector<Vec2> means_;
  double sigma_ = 0.15;
  BoundingBox2 bbox_;
};

struct ScanConfig {
  double ground_margin = 0.3;
  double cluster_gap = 1.0;
  double sigma = 0.15;
};

/// Keeps points with z - ground_height > margin, preserving order.
std::vector<ScanPoint> remove_ground(const Frame& frame, double ground_height,
                                     double margin = 0.3);

/// Single-linkage connected components under planar distance <= gap.
/// Clusters are ordered by their lowest input index; points keep input order.
std::vector<Cluster> cluster_points(std::span<const ScanPoint> points, double gap,
                                    double sigma = 0.15);

/// Same partition as cluster_points, returned as index lists.
std::vector<std::vector<std::size_t>> cluster_indices(std::span<const ScanPoint> points,
                                                      double gap);

/// Angle of the ray from the cluster centroid to the sensor, in (-pi, pi].
double viewing_angle(const Cluster& cluster, const SensorOrigin& sensor);
double viewing_angle(const Vec2& from, const SensorOrigin& sensor);

}  // namespace vdamf
