#include "support/oracles.hpp"
#include "vdamf/scan_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

namespace vdamf {
namespace {

std::set<std::vector<std::size_t>> as_partition(std::vector<std::vector<std::size_t>> groups) {
  std::set<std::vector<std::size_t>> out;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    out.insert(g);
  }
  return out;
}

TEST(RemoveGround, AllOnGroundGivesEmpty) {
  Frame f;
  f.points = {{0, 0, 0}, {1, 0, 0}, {2, 3, 0}};
  EXPECT_TRUE(remove_ground(f, 0.0).empty());
}

TEST(RemoveGround, KeepsPointsAboveMarginInOrder) {
  Frame f;
  f.points = {{0, 0, 0.1}, {1, 0, 0.5}, {2, 0, 1.2}};
  const auto kept = remove_ground(f, 0.0, 0.3);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_DOUBLE_EQ(kept[0].z, 0.5);
  EXPECT_DOUBLE_EQ(kept[1].z, 1.2);
}

TEST(RemoveGround, RespectsGroundHeight) {
  Frame f;
  f.points = {{0, 0, 10.2}, {0, 0, 10.4}};
  EXPECT_EQ(remove_ground(f, 10.0, 0.3).size(), 1u);
}

TEST(ClusterPoints, WithinGapJoins) {
  std::vector<ScanPoint> pts = {{0, 0, 1}, {0.5, 0, 1}};
  EXPECT_EQ(cluster_points(pts, 1.0).size(), 1u);
}

TEST(ClusterPoints, BeyondGapSplits) {
  std::vector<ScanPoint> pts = {{0, 0, 1}, {1.5, 0, 1}};
  EXPECT_EQ(cluster_points(pts, 1.0).size(), 2u);
}

TEST(ClusterPoints, ChainsThroughIntermediatePoints) {
  std::vector<ScanPoint> pts = {{0, 0, 1}, {0.9, 0, 1}, {1.8, 0, 1}, {2.7, 0, 1}};
  EXPECT_EQ(cluster_points(pts, 1.0).size(), 1u);
}

TEST(ClusterPoints, RejectsNonPositiveGap) {
  std::vector<ScanPoint> pts = {{0, 0, 1}};
  EXPECT_THROW(cluster_points(pts, 0.0), InvalidInput);
}

TEST(ClusterPoints, MatchesBruteForceOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    const std::size_t n = 20 + static_cast<std::size_t>(trial) * 4;  // up to 176
    std::vector<ScanPoint> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), 1.0};
    const auto fast = as_partition(cluster_indices(pts, 1.0));
    const auto slow = oracle::brute_force_partition(pts, 1.0);
    ASSERT_EQ(fast, slow) << "trial " << trial;
  }
}

TEST(ClusterPoints, HundredRandomPointsMatchOracle) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  std::vector<ScanPoint> pts(100);
  for (auto& p : pts) p = {u(rng), u(rng), 0.8};
  EXPECT_EQ(as_partition(cluster_indices(pts, 1.0)), oracle::brute_force_partition(pts, 1.0));
}

TEST(ClusterPoints, PartitionAndPermutationInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<ScanPoint> pts(150);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {u(rng), u(rng), static_cast<double>(i)};

  const auto clusters = cluster_points(pts, 1.0);
  std::multiset<double> seen;
  for (const auto& c : clusters)
    for (const auto& p : c.points()) seen.insert(p.z);
  ASSERT_EQ(seen.size(), pts.size());
  EXPECT_EQ(std::set<double>(seen.begin(), seen.end()).size(), pts.size());

  auto as_z_sets = [](const std::vector<Cluster>& cs) {
    std::set<std::set<double>> out;
    for (const auto& c : cs) {
      std::set<double> s;
      for (const auto& p : c.points()) s.insert(p.z);
      out.insert(s);
    }
    return out;
  };
  auto shuffled = pts;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(as_z_sets(clusters), as_z_sets(cluster_points(shuffled, 1.0)));
}

TEST(Cluster, BoundingBoxIsTight) {
  Cluster c({{1, 2, 1}, {-1, 5, 1}, {3, 0, 1}}, 0.15);
  EXPECT_DOUBLE_EQ(c.bbox().min.x(), -1);
  EXPECT_DOUBLE_EQ(c.bbox().min.y(), 0);
  EXPECT_DOUBLE_EQ(c.bbox().max.x(), 3);
  EXPECT_DOUBLE_EQ(c.bbox().max.y(), 5);
  EXPECT_THROW(Cluster({{0, 0, 0}}, 0.0), InvalidInput);
}

TEST(ViewingAngle, CardinalDirections) {
  Cluster origin({{0, 0, 1}}, 0.15);
  EXPECT_NEAR(viewing_angle(origin, {10, 0, 2}), 0.0, 1e-15);
  EXPECT_NEAR(viewing_angle(origin, {0, 10, 2}), kPi / 2, 1e-15);
  Cluster c34({{3, 4, 1}}, 0.15);
  EXPECT_NEAR(viewing_angle(c34, {3, -1, 2}), -kPi / 2, 1e-15);
}

TEST(ViewingAngle, TranslationEquivariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<ScanPoint> pts = {{u(rng), u(rng), 1}, {u(rng), u(rng), 1}};
    SensorOrigin s{u(rng), u(rng), 2};
    const double dx = u(rng), dy = u(rng);
    auto moved = pts;
    for (auto& p : moved) {
      p.x += dx;
      p.y += dy;
    }
    const double a = viewing_angle(Cluster(pts, 0.15), s);
    const double b = viewing_angle(Cluster(moved, 0.15), {s.x + dx, s.y + dy, s.z});
    EXPECT_NEAR(std::remainder(a - b, 2 * kPi), 0.0, 1e-9);
  }
}

}  // namespace
}  // namespace vdamf
