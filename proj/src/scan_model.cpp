#include "vdamf/scan_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace vdamf {

Cluster::Cluster(std::vector<ScanPoint> points, double sigma)
    : points_(std::move(points)), sigma_(sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("cluster sigma must be positive");
  means_.reserve(points_.size());
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw InvalidInput("scan point coordinates must be finite");
    }
    means_.emplace_back(p.x, p.y);
  }
  if (!means_.empty()) {
    bbox_.min = bbox_.max = means_.front();
    for (const auto& m : means_) {
      bbox_.min = bbox_.min.cwiseMin(m);
      bbox_.max = bbox_.max.cwiseMax(m);
    }
  }
}

Vec2 Cluster::centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& m : means_) c += m;
  return means_.empty() ? c : Vec2(c / static_cast<double>(means_.size()));
}

Cluster Cluster::merge(std::span<const Cluster* const> parts) {
  if (parts.empty()) return {};
  std::vector<ScanPoint> all;
  for (const Cluster* c : parts) all.insert(all.end(), c->points().begin(), c->points().end());
  return Cluster(std::move(all), parts.front()->sigma());
}

std::vector<ScanPoint> remove_ground(const Frame& frame, double ground_height, double margin) {
  std::vector<ScanPoint> out;
  out.reserve(frame.points.size());
  for (const auto& p : frame.points) {
    if (p.z - ground_height > margin) out.push_back(p);
  }
  return out;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Root at the lower index so component order is deterministic.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

std::uint64_t cell_key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xffffffffULL);
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_indices(std::span<const ScanPoint> points,
                                                      double gap) {
  if (!(gap > 0.0)) throw InvalidInput("cluster gap must be positive");
  const std::size_t n = points.size();
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  grid.reserve(n);
  std::vector<std::int64_t> cx(n), cy(n);
  for (std::size_t i = 0; i < n; ++i) {
    cx[i] = static_cast<std::int64_t>(std::floor(points[i].x / gap));
    cy[i] = static_cast<std::int64_t>(std::floor(points[i].y / gap));
    grid[cell_key(cx[i], cy[i])].push_back(i);
  }

  DisjointSets sets(n);
  const double gap2 = gap * gap;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(cx[i] + dx, cy[i] + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i) continue;
          const double ex = points[i].x - points[j].x;
          const double ey = points[i].y - points[j].y;
          if (ex * ex + ey * ey <= gap2) sets.unite(i, j);
        }
      }
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return groups;
}

std::vector<Cluster> cluster_points(std::span<const ScanPoint> points, double gap, double sigma) {
  std::vector<Cluster> clusters;
  for (const auto& group : cluster_indices(points, gap)) {
    std::vector<ScanPoint> members;
    members.reserve(group.size());
    for (std::size_t i : group) members.push_back(points[i]);
    clusters.emplace_back(std::move(members), sigma);
  }
  return clusters;
}

double viewing_angle(const Vec2& from, const SensorOrigin& sensor) {
  return wrap_angle(std::atan2(sensor.y - from.y(), sensor.x - from.x()));
}

double viewing_angle(const Cluster& cluster, const SensorOrigin& sensor) {
  if (cluster.empty()) throw InvalidInput("viewing_angle: empty cluster");
  return viewing_angle(cluster.centroid(), sensor);
}

}  // namespace vdamf
