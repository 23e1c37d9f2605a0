#include "vdamf/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace vdamf {

void GridConfig::validate() const {
  if (!(cell > 0.0) || !std::isfinite(cell)) throw InvalidInput("grid cell must be positive");
  if (nx <= 0 || ny <= 0 || nz <= 0) throw InvalidInput("grid dimensions must be positive");
}

void TrainConfig::validate() const {
  if (!(reg > 0.0) || !std::isfinite(reg)) throw InvalidInput("reg must be positive");
  if (iterations <= 0) throw InvalidInput("iterations must be positive");
}

CanonicalCloud canonicalize(std::span<const ScanPoint> points, const MatchState& state,
                            const SensorOrigin& sensor, double ground_height) {
  if (points.empty()) throw InvalidInput("canonicalize: no points");
  state.validate();
  const Mat2 r = rotation(state.theta);
  const Vec2 center = state.position();

  CanonicalCloud out;
  double best = std::numeric_limits<double>::infinity();
  Vec2 origin = Vec2::Zero();
  double sx = 1.0;
  double sy = 1.0;
  for (int corner = 0; corner < 4; ++corner) {
    const double cx = (corner & 1) ? 1.0 : -1.0;
    const double cy = (corner & 2) ? 1.0 : -1.0;
    const Vec2 c = center + r * Vec2(cx * 0.5 * state.l, cy * 0.5 * state.w);
    const double d = (c - sensor.planar()).squaredNorm();
    if (d < best) {
      best = d;
      origin = c;
      sx = cx;
      sy = cy;
      out.origin_corner = corner;
    }
  }
  // Axes point from the origin corner into the rectangle.
  const Vec2 ex = r * Vec2(-sx, 0.0);
  const Vec2 ey = r * Vec2(0.0, -sy);

  out.points.reserve(points.size());
  double mean_y = 0.0;
  for (const ScanPoint& p : points) {
    const Vec2 d = Vec2(p.x, p.y) - origin;
    const Vec3 q(d.dot(ex), d.dot(ey), p.z - ground_height);
    mean_y += q.y();
    out.points.push_back(q);
  }
  if (mean_y < 0.0) {
    out.mirrored = true;
    for (Vec3& q : out.points) q.y() = -q.y();
  }
  return out;
}

FeatureGrid bin(const CanonicalCloud& cloud, const GridConfig& config) {
  config.validate();
  FeatureGrid g;
  g.config = config;
  g.values = Eigen::VectorXd::Zero(config.size());
  for (const Vec3& q : cloud.points) {
    const double fx = std::floor(q.x() / config.cell);
    const double fy = std::floor(q.y() / config.cell);
    const double fz = std::floor(q.z() / config.cell);
    if (fx < 0 || fy < 0 || fz < 0 || fx >= config.nx || fy >= config.ny || fz >= config.nz) {
      ++g.dropped;
      continue;
    }
    g.values[config.index(static_cast<int>(fx), static_cast<int>(fy), static_cast<int>(fz))] += 1.0;
    ++g.in_grid;
  }
  if (g.in_grid > 0) g.values /= static_cast<double>(g.in_grid);
  return g;
}

namespace {

void check_shapes(std::span<const FeatureGrid> grids, const GridConfig& config) {
  for (const FeatureGrid& g : grids) {
    if (!(g.config == config) || g.values.size() != config.size()) {
      throw InvalidInput("feature grid shape mismatch");
    }
  }
}

}  // namespace

double svm_objective(const LinearClassifier& clf, std::span<const FeatureGrid> positives,
                     std::span<const FeatureGrid> negatives, double reg) {
  double loss = 0.0;
  for (const FeatureGrid& g : positives) loss += std::max(0.0, 1.0 - score(g, clf));
  for (const FeatureGrid& g : negatives) loss += std::max(0.0, 1.0 + score(g, clf));
  const double n = static_cast<double>(positives.size() + negatives.size());
  return 0.5 * reg * (clf.weights.squaredNorm() + clf.bias * clf.bias) + loss / n;
}

LinearClassifier train(std::span<const FeatureGrid> positives,
                       std::span<const FeatureGrid> negatives, const TrainConfig& cfg) {
  cfg.validate();
  if (positives.empty() || negatives.empty()) {
    throw InvalidInput("train: both classes need at least one example");
  }
  const GridConfig config = positives.front().config;
  check_shapes(positives, config);
  check_shapes(negatives, config);

  const int d = config.size();
  const std::size_t n = positives.size() + negatives.size();
  Eigen::MatrixXd x(d + 1, n);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i < positives.size();
    const FeatureGrid& g = pos ? positives[i] : negatives[i - positives.size()];
    x.col(i).head(d) = g.values;
    x(d, i) = 1.0;
    y[i] = pos ? 1.0 : -1.0;
  }

  const double radius = 1.0 / std::sqrt(cfg.reg);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd best = w;
  auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::ArrayXd margins = 1.0 - y.array() * (x.transpose() * v).array();
    return 0.5 * cfg.reg * v.squaredNorm() + margins.max(0.0).sum() / static_cast<double>(n);
  };
  double best_obj = objective(w);
  for (int t = 1; t <= cfg.iterations; ++t) {
    const Eigen::VectorXd s = x.transpose() * w;
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] * s[i] < 1.0) coeff[i] = y[i];
    }
    const Eigen::VectorXd grad = cfg.reg * w - x * coeff / static_cast<double>(n);
    w -= grad / (cfg.reg * t);
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;
    const double obj = objective(w);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }

  LinearClassifier clf;
  clf.config = config;
  clf.weights = best.head(d);
  clf.bias = best[d];
  clf.reg = cfg.reg;
  clf.iterations = cfg.iterations;
  clf.objective = best_obj;
  clf.positives = positives.size();
  clf.negatives = negatives.size();
  return clf;
}

double score(const FeatureGrid& grid, const LinearClassifier& clf) {
  if (!(grid.config == clf.config) || grid.values.size() != clf.weights.size()) {
    throw InvalidInput("score: grid does not match classifier");
  }
  return grid.values.dot(clf.weights) + clf.bias;
}

double roc_auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw InvalidInput("roc_auc: both classes need scores");
  }
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(neg.begin(), neg.end());
  double total = 0.0;
  for (double p : positive_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(neg.begin(), neg.end(), p);
    total += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return total / (static_cast<double>(positive_scores.size()) * static_cast<double>(neg.size()));
}

ObjectSample sample_from_points(std::span<const ScanPoint> points, const SensorOrigin& sensor,
                                const SampleConfig& cfg) {
  if (points.empty()) throw InvalidInput("sample_from_points: no points");
  const Cluster cluster(std::vector<ScanPoint>(points.begin(), points.end()), cfg.sigma);
  const double phi = viewing_angle(cluster, sensor);
  const MatchState init = initialize_state(cluster, phi, cfg.optimizer.size_bounds);
  const FitResult fr = fit(cluster, init, sensor, cfg.optimizer);
  ObjectSample s;
  s.state = fr.state;
  s.hits = points.size();
  s.grid = bin(canonicalize(points, fr.state, sensor, cfg.ground_height), cfg.grid);
  return s;
}

std::vector<ObjectSample> object_samples(const Frame& frame, const SampleConfig& cfg) {
  if (frame.labels.size() != frame.points.size()) {
    throw InvalidInput("object_samples: frame has no per-point labels");
  }
  std::map<int, std::vector<ScanPoint>> groups;
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const int label = frame.labels[i];
    if (label == kGroundLabel) continue;
    if (frame.points[i].z - cfg.ground_height <= cfg.ground_margin) continue;
    groups[label].push_back(frame.points[i]);
  }
  std::vector<ObjectSample> out;
  for (const auto& [id, pts] : groups) {
    if (pts.size() < cfg.min_hits) continue;
    ObjectSample s = sample_from_points(pts, frame.sensor, cfg);
    s.object_id = id;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vdamf
