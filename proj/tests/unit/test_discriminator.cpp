#include "vdamf/discriminator.hpp"

#include "vdamf/scenarios.hpp"

#include <gtest/gtest.h>

#include <random>

namespace vdamf {
namespace {

std::vector<ScanPoint> mirrored_y(const std::vector<ScanPoint>& pts) {
  std::vector<ScanPoint> out = pts;
  for (ScanPoint& p : out) p.y = -p.y;
  return out;
}

Frame mirrored_y(const Frame& f) {
  Frame out = f;
  out.points = mirrored_y(f.points);
  out.sensor.y = -out.sensor.y;
  return out;
}

std::vector<ScanPoint> object_points(const Frame& f, int id) {
  std::vector<ScanPoint> out;
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    if (f.labels[i] == id && f.points[i].z > 0.3) out.push_back(f.points[i]);
  }
  return out;
}

void expect_same_cloud(const CanonicalCloud& a, const CanonicalCloud& b, double tol) {
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_LE((a.points[i] - b.points[i]).norm(), tol) << "point " << i;
  }
}

// Unit-mass grid spread over `n` random cells drawn from a box of cells.
FeatureGrid random_grid(std::mt19937_64& rng, int x0, int x1, int y0, int y1, int z0, int z1, int n) {
  FeatureGrid g;
  g.values = Eigen::VectorXd::Zero(g.config.size());
  std::uniform_int_distribution<int> ix(x0, x1), iy(y0, y1), iz(z0, z1);
  for (int k = 0; k < n; ++k) g.values[g.config.index(ix(rng), iy(rng), iz(rng))] += 1.0 / n;
  g.in_grid = static_cast<std::size_t>(n);
  return g;
}

struct SeparableSet {
  std::vector<FeatureGrid> pos, neg;
};

// Long, low footprints against tall, thin columns: disjoint supports.
SeparableSet separable_set(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  SeparableSet s;
  for (int k = 0; k < n; ++k) {
    s.pos.push_back(random_grid(rng, 6, 20, 0, 8, 1, 6, 40));
    s.neg.push_back(random_grid(rng, 0, 3, 0, 3, 0, 9, 40));
  }
  return s;
}

TEST(Canonicalize, AxisAlignedCornerNearSensor) {
  const MatchState s{10.0, 5.0, 0.0, 2.0, 4.0};
  const std::vector<ScanPoint> pts{{8.0, 4.0, 1.0}, {9.0, 4.5, 0.5}, {8.5, 5.0, 1.2}};
  const CanonicalCloud c = canonicalize(pts, s, {0.0, 0.0, 2.0}, 0.0);
  EXPECT_EQ(c.origin_corner, 0);
  EXPECT_FALSE(c.mirrored);
  EXPECT_LE((c.points[0] - Vec3(0.0, 0.0, 1.0)).norm(), 1e-12);
  EXPECT_LE((c.points[1] - Vec3(1.0, 0.5, 0.5)).norm(), 1e-12);
  EXPECT_LE((c.points[2] - Vec3(0.5, 1.0, 1.2)).norm(), 1e-12);
}

TEST(Canonicalize, HeightIsAboveLocalGround) {
  const MatchState s{10.0, 5.0, 0.0, 2.0, 4.0};
  const std::vector<ScanPoint> pts{{8.0, 4.0, 1.0}};
  EXPECT_NEAR(canonicalize(pts, s, {}, 0.4).points[0].z(), 0.6, 1e-12);
}

TEST(Canonicalize, RejectsEmptyInput) {
  EXPECT_THROW(canonicalize({}, MatchState{}, {}, 0.0), InvalidInput);
}

TEST(Canonicalize, MirroredSceneGivesTheSameCloud) {
  const Scene scene = scenarios::single_vehicle({14.0, 3.0, 0.8}, 2, 0.03);
  const Frame f = render_frame(scene, 0.0, 0).frame;
  const auto pts = object_points(f, 1);
  const MatchState s{14.0, 3.0, 0.8, 1.8, 4.5};
  const CanonicalCloud a = canonicalize(pts, s, f.sensor, 0.0);
  const Frame m = mirrored_y(f);
  const CanonicalCloud b = canonicalize(mirrored_y(pts), {14.0, -3.0, -0.8, 1.8, 4.5}, m.sensor, 0.0);
  expect_same_cloud(a, b, 1e-9);
}

TEST(Canonicalize, RigidMotionGivesTheSameCloud) {
  const Scene scene = scenarios::single_vehicle({18.0, -2.0, 2.1}, 3, 0.03);
  const Frame f = render_frame(scene, 0.0, 0).frame;
  const auto pts = object_points(f, 1);
  const MatchState s{18.0, -2.0, 2.1, 1.8, 4.5};
  const CanonicalCloud a = canonicalize(pts, s, f.sensor, 0.0);
  const Mat2 r = rotation(-1.3);
  const Vec2 t(4.0, 9.0);
  std::vector<ScanPoint> moved;
  for (const ScanPoint& p : pts) {
    const Vec2 q = r * Vec2(p.x, p.y) + t;
    moved.push_back({q.x(), q.y(), p.z});
  }
  const Vec2 c = r * s.position() + t;
  const Vec2 sen = r * f.sensor.planar() + t;
  const CanonicalCloud b = canonicalize(moved, {c.x(), c.y(), s.theta - 1.3, s.w, s.l},
                                        {sen.x(), sen.y(), f.sensor.z}, 0.0);
  expect_same_cloud(a, b, 1e-9);
}

TEST(Bin, SinglePointFillsItsCell) {
  const GridConfig cfg;
  CanonicalCloud c;
  c.points = {Vec3(2.5 * cfg.cell, 3.5 * cfg.cell, 1.5 * cfg.cell)};
  const FeatureGrid g = bin(c, cfg);
  EXPECT_DOUBLE_EQ(g.values[cfg.index(2, 3, 1)], 1.0);
  EXPECT_DOUBLE_EQ(g.values.sum(), 1.0);
  EXPECT_EQ(g.in_grid, 1u);
}

TEST(Bin, RepeatedPointsNormalizeAway) {
  CanonicalCloud one, many;
  one.points = {Vec3(1.1, 0.6, 0.4)};
  many.points.assign(17, Vec3(1.1, 0.6, 0.4));
  EXPECT_EQ(bin(one).values, bin(many).values);
}

TEST(Bin, RandomCloudHasUnitSumAndCountsDropped) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 8.0);
  CanonicalCloud c;
  for (int k = 0; k < 500; ++k) c.points.emplace_back(u(rng), u(rng) * 0.5, u(rng) * 0.4);
  const FeatureGrid g = bin(c);
  EXPECT_EQ(g.in_grid + g.dropped, c.points.size());
  EXPECT_GT(g.dropped, 0u);
  EXPECT_NEAR(g.values.sum(), 1.0, 1e-12);
  EXPECT_GE(g.values.minCoeff(), 0.0);
}

TEST(Bin, AllOutsideGivesZeroGrid) {
  CanonicalCloud c;
  c.points = {Vec3(-1.0, 0.0, 0.0), Vec3(0.0, 0.0, 50.0)};
  const FeatureGrid g = bin(c);
  EXPECT_EQ(g.values.sum(), 0.0);
  EXPECT_EQ(g.dropped, 2u);
}

TEST(Train, SeparatesConstructedSet) {
  const SeparableSet s = separable_set(1, 100);
  const LinearClassifier clf = train(s.pos, s.neg);
  int correct = 0;
  for (const auto& g : s.pos) correct += score(g, clf) > 0.0;
  for (const auto& g : s.neg) correct += score(g, clf) < 0.0;
  EXPECT_GE(correct, 0.99 * 200);
  EXPECT_EQ(clf.positives, 100u);
  EXPECT_EQ(clf.negatives, 100u);
}

TEST(Train, FlippedLabelsNegateTheClassifier) {
  const SeparableSet s = separable_set(2, 60);
  const LinearClassifier a = train(s.pos, s.neg);
  const LinearClassifier b = train(s.neg, s.pos);
  for (const auto* set : {&s.pos, &s.neg}) {
    for (const auto& g : *set) EXPECT_NEAR(score(g, a), -score(g, b), 1e-9);
  }
}

TEST(Train, DuplicatedSetKeepsTheDecisionFunction) {
  const SeparableSet s = separable_set(3, 60);
  SeparableSet d = s;
  d.pos.insert(d.pos.end(), s.pos.begin(), s.pos.end());
  d.neg.insert(d.neg.end(), s.neg.begin(), s.neg.end());
  const LinearClassifier a = train(s.pos, s.neg);
  const LinearClassifier b = train(d.pos, d.neg);
  for (const auto& g : s.pos) EXPECT_NEAR(score(g, a), score(g, b), 1e-6);
  for (const auto& g : s.neg) EXPECT_NEAR(score(g, a), score(g, b), 1e-6);
}

TEST(Train, ReturnsItsBestObjective) {
  const SeparableSet s = separable_set(4, 40);
  const TrainConfig cfg;
  const LinearClassifier clf = train(s.pos, s.neg, cfg);
  EXPECT_NEAR(clf.objective, svm_objective(clf, s.pos, s.neg, cfg.reg), 1e-12);
  LinearClassifier zero = clf;
  zero.weights.setZero();
  zero.bias = 0.0;
  EXPECT_LE(clf.objective, svm_objective(zero, s.pos, s.neg, cfg.reg));
}

TEST(Train, RejectsEmptyClassOrBadConfig) {
  const SeparableSet s = separable_set(5, 5);
  EXPECT_THROW(train(s.pos, {}), InvalidInput);
  EXPECT_THROW(train({}, s.neg), InvalidInput);
  TrainConfig cfg;
  cfg.reg = 0.0;
  EXPECT_THROW(train(s.pos, s.neg, cfg), InvalidInput);
}

TEST(Score, ZeroGridGivesBiasAndScoreIsAffine) {
  const SeparableSet s = separable_set(6, 30);
  const LinearClassifier clf = train(s.pos, s.neg);
  FeatureGrid zero;
  zero.values = Eigen::VectorXd::Zero(zero.config.size());
  EXPECT_DOUBLE_EQ(score(zero, clf), clf.bias);
  const double a = 0.3, b = 1.7;
  FeatureGrid mix;
  mix.values = a * s.pos[0].values + b * s.neg[0].values;
  EXPECT_NEAR(score(mix, clf), a * score(s.pos[0], clf) + b * score(s.neg[0], clf) - (a + b - 1) * clf.bias,
              1e-12);
}

TEST(Score, TrainingPositivesOutscoreNegatives) {
  const SeparableSet s = separable_set(7, 30);
  const LinearClassifier clf = train(s.pos, s.neg);
  double p = 0.0, n = 0.0;
  for (const auto& g : s.pos) p += score(g, clf);
  for (const auto& g : s.neg) n += score(g, clf);
  EXPECT_GT(p / s.pos.size(), n / s.neg.size());
}

TEST(Score, RejectsShapeMismatch) {
  const SeparableSet s = separable_set(8, 5);
  const LinearClassifier clf = train(s.pos, s.neg);
  FeatureGrid g;
  g.config.nx = 10;
  g.values = Eigen::VectorXd::Zero(g.config.size());
  EXPECT_THROW(score(g, clf), InvalidInput);
}

TEST(RocAuc, MatchesPairCounting) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> u(0, 8);
  std::vector<double> pos(40), neg(50);
  for (double& v : pos) v = u(rng) + 1;
  for (double& v : neg) v = u(rng);
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  EXPECT_NEAR(roc_auc(pos, neg), wins / (pos.size() * neg.size()), 1e-12);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{2, 3}, std::vector<double>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0, 1}, std::vector<double>{2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{1}, std::vector<double>{1}), 0.5);
}

TEST(ObjectSamples, OneSamplePerLabeledObject) {
  Scene scene = scenarios::single_vehicle({12.0, -4.0, 0.3}, 1);
  scene.objects.push_back(scenarios::clutter_object(5, {20.0, 6.0, 0.0}, 3));
  const Frame f = render_frame(scene, 0.0, 0).frame;
  const auto samples = object_samples(f);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].object_id, 1);
  EXPECT_EQ(samples[1].object_id, 5);
  for (const auto& s : samples) {
    EXPECT_GE(s.hits, 10u);
    EXPECT_NEAR(s.grid.values.sum(), 1.0, 1e-12);
  }
}

TEST(Pipeline, MirroredSceneScoresIdentically) {
  std::vector<FeatureGrid> pos, neg;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const auto& s : object_samples(render_frame(scenarios::classification_scene(ObjectKind::kVehicle, seed), 0, 0).frame)) pos.push_back(s.grid);
    for (const auto& s : object_samples(render_frame(scenarios::classification_scene(ObjectKind::kClutter, seed), 0, 0).frame)) neg.push_back(s.grid);
  }
  const LinearClassifier clf = train(pos, neg);
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const Frame f = render_frame(scenarios::classification_scene(ObjectKind::kVehicle, seed), 0, 0).frame;
    const Frame m = mirrored_y(f);
    const auto a = sample_from_points(object_points(f, 1), f.sensor);
    const auto b = sample_from_points(object_points(m, 1), m.sensor);
    EXPECT_NEAR(score(a.grid, clf), score(b.grid, clf), 1e-9) << "seed " << seed;
  }
}

}  // namespace
}  // namespace vdamf
