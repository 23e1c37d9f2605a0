#pragma once

#include "vdamf/pose_optimizer.hpp"
#include "vdamf/scan_model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace vdamf {

/// Hits expressed in an object's canonical frame: origin at the fitted corner
/// nearest the sensor, x along the length axis and y along the width axis,
/// both pointing into the object, z above the local ground.
struct CanonicalCloud {
  std::vector<Vec3> points;
  /// Corner index: bit 0 set for the +x (front) end, bit 1 for the +y (right) side.
  int origin_corner = 0;
  bool mirrored = false;
};

struct GridConfig {
  double cell = 0.25;
  int nx = 24;
  int ny = 12;
  int nz = 10;

  int size() const { return nx * ny * nz; }
  /// Flat index of cell (ix, iy, iz); z varies fastest.
  int index(int ix, int iy, int iz) const { return (ix * ny + iy) * nz + iz; }
  void validate() const;
  bool operator==(const GridConfig&) const = default;
};

struct FeatureGrid {
  GridConfig config;
  Eigen::VectorXd values;  // unit sum unless every point fell outside
  std::size_t in_grid = 0;
  std::size_t dropped = 0;
};

struct LinearClassifier {
  GridConfig config;
  Eigen::VectorXd weights;
  double bias = 0.0;
  // Training metadata.
  double reg = 0.0;
  int iterations = 0;
  double objective = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct TrainConfig {
  double reg = 1e-3;
  int iterations = 1000;

  void validate() const;
};

CanonicalCloud canonicalize(std::span<const ScanPoint> points, const MatchState& state,
                            const SensorOrigin& sensor, double ground_height);

FeatureGrid bin(const CanonicalCloud& cloud, const GridConfig& config = {});

/// L2-regularized hinge loss, averaged over samples, minimized by full-batch
/// projected subgradient descent with step 1/(reg t). The bias is an extra
/// weight on a constant unit feature. The iterate with the lowest objective is
/// returned, so the result is a deterministic function of the inputs.
LinearClassifier train(std::span<const FeatureGrid> positives,
                       std::span<const FeatureGrid> negatives, const TrainConfig& cfg = {});

/// Regularized objective of (weights, bias) on the given samples.
double svm_objective(const LinearClassifier& clf, std::span<const FeatureGrid> positives,
                     std::span<const FeatureGrid> negatives, double reg);

/// <weights, grid> + bias; positive means vehicle.
double score(const FeatureGrid& grid, const LinearClassifier& clf);

/// Area under the ROC curve, ties counted as one half.
double roc_auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

/// A labeled object extracted from one frame.
struct ObjectSample {
  int object_id = 0;
  MatchState state;
  FeatureGrid grid;
  std::size_t hits = 0;
};

inline OptimizerConfig length_axis_optimizer() {
  OptimizerConfig c;
  c.enforce_length_axis = true;
  return c;
}

struct SampleConfig {
  double ground_height = 0.0;
  double ground_margin = 0.3;
  double sigma = 0.15;
  std::size_t min_hits = 10;
  OptimizerConfig optimizer = length_axis_optimizer();
  GridConfig grid;
};

/// Groups the above-ground hits of a labeled frame by object id, fits each
/// group from its bounding box and bins it in the canonical frame. Groups
/// with fewer than min_hits hits are skipped. Ordered by object id.
std::vector<ObjectSample> object_samples(const Frame& frame, const SampleConfig& cfg = {});

/// Fits an unlabeled point group and bins it.
ObjectSample sample_from_points(std::span<const ScanPoint> points, const SensorOrigin& sensor,
                                const SampleConfig& cfg = {});

}  // namespace vdamf
