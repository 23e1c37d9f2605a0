#include "vdamf/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace vdamf {

namespace {

// Counter-seeded generator so every ray draws the same noise regardless of
// thread scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  return g();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hit {
  double t = kInf;
  int label = kGroundLabel;
  BoxFace face = BoxFace::kNone;
};

// Ray against the box [-l/2,l/2]x[-w/2,w/2]x[z0,z1] given in its own frame.
std::optional<std::pair<double, BoxFace>> intersect_box(const Vec3& o, const Vec3& d, double l,
                                                        double w, double z0, double z1) {
  const double lo[3] = {-l / 2, -w / 2, z0};
  const double hi[3] = {l / 2, w / 2, z1};
  double tmin = -kInf, tmax = kInf;
  int axis_in = -1;
  bool enter_low = false;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double t1 = (lo[k] - o[k]) / d[k];
    double t2 = (hi[k] - o[k]) / d[k];
    bool low_first = true;
    if (t1 > t2) {
      std::swap(t1, t2);
      low_first = false;
    }
    if (t1 > tmin) {
      tmin = t1;
      axis_in = k;
      enter_low = low_first;
    }
    tmax = std::min(tmax, t2);
  }
  if (tmin > tmax || tmin <= 0.0 || axis_in < 0) return std::nullopt;
  static constexpr BoxFace low_face[3] = {BoxFace::kRear, BoxFace::kLeft, BoxFace::kBottom};
  static constexpr BoxFace high_face[3] = {BoxFace::kFront, BoxFace::kRight, BoxFace::kTop};
  return std::pair{tmin, enter_low ? low_face[axis_in] : high_face[axis_in]};
}

std::optional<double> intersect_ellipsoid(const Vec3& o, const Vec3& d, const Ellipsoid& e) {
  const double c = std::cos(-e.yaw), s = std::sin(-e.yaw);
  const Vec3 po = o - e.center;
  Vec3 p(c * po.x() - s * po.y(), s * po.x() + c * po.y(), po.z());
  Vec3 q(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z());
  p = p.cwiseQuotient(e.radii);
  q = q.cwiseQuotient(e.radii);
  const double a = q.squaredNorm();
  const double b = 2.0 * p.dot(q);
  const double cc = p.squaredNorm() - 1.0;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t1 = (-b - sq) / (2.0 * a);
  if (t1 > 0.0) return t1;
  const double t2 = (-b + sq) / (2.0 * a);
  if (t2 > 0.0) return t2;
  return std::nullopt;
}

struct PlacedObject {
  const SceneObject* obj;
  Pose2 pose;
  double reach;  // planar bounding radius
};

Hit cast_ray(const Vec3& origin, const Vec3& dir, const std::vector<PlacedObject>& placed) {
  Hit best;
  if (dir.z() < 0.0) best.t = -origin.z() / dir.z();

  for (const auto& po : placed) {
    const SceneObject& obj = *po.obj;
    // Planar bounding-circle rejection.
    const double ox = origin.x() - po.pose.x;
    const double oy = origin.y() - po.pose.y;
    const double dxy2 = dir.x() * dir.x() + dir.y() * dir.y();
    if (dxy2 > 0.0) {
      const double tc = -(ox * dir.x() + oy * dir.y()) / dxy2;
      const double px = ox + tc * dir.x(), py = oy + tc * dir.y();
      if (px * px + py * py > po.reach * po.reach) continue;
      if (tc < 0.0 && ox * ox + oy * oy > po.reach * po.reach) continue;
    }
    const double c = std::cos(-po.pose.heading), s = std::sin(-po.pose.heading);
    const Vec3 lo(c * ox - s * oy, s * ox + c * oy, origin.z());
    const Vec3 ld(c * dir.x() - s * dir.y(), s * dir.x() + c * dir.y(), dir.z());
    if (obj.kind == ObjectKind::kVehicle) {
      if (auto h = intersect_box(lo, ld, obj.length, obj.width, obj.clearance, obj.height)) {
        if (h->first < best.t) best = {h->first, obj.id, h->second};
      }
    } else {
      for (const auto& e : obj.blobs) {
        if (auto t = intersect_ellipsoid(lo, ld, e)) {
          if (*t < best.t) best = {*t, obj.id, BoxFace::kNone};
        }
      }
    }
  }
  return best;
}

double object_reach(const SceneObject& obj) {
  if (obj.kind == ObjectKind::kVehicle) return 0.5 * std::hypot(obj.length, obj.width) + 1e-6;
  double r = 0.0;
  for (const auto& e : obj.blobs) {
    r = std::max(r, std::hypot(e.center.x(), e.center.y()) + e.radii.head<2>().maxCoeff());
  }
  return r + 1e-6;
}

}  // namespace

Trajectory Trajectory::fixed(const Pose2& pose) {
  Trajectory t;
  t.kind_ = Kind::kStatic;
  t.points_ = {{0.0, pose}};
  return t;
}

Trajectory Trajectory::waypoints(std::vector<Waypoint> points) {
  if (points.empty()) throw InvalidInput("trajectory needs at least one waypoint");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].t > points[i - 1].t)) throw InvalidInput("waypoint times must increase");
  }
  Trajectory t;
  t.kind_ = Kind::kWaypoints;
  t.points_ = std::move(points);
  return t;
}

Trajectory Trajectory::circle(const Vec2& center, double radius, double speed, double phase,
                              bool clockwise) {
  if (!(radius > 0.0)) throw InvalidInput("circle radius must be positive");
  Trajectory t;
  t.kind_ = Kind::kCircle;
  t.center_ = center;
  t.radius_ = radius;
  t.speed_ = speed;
  t.phase_ = phase;
  t.clockwise_ = clockwise;
  return t;
}

Pose2 Trajectory::at(double t) const {
  switch (kind_) {
    case Kind::kStatic:
      return points_.front().pose;
    case Kind::kCircle: {
      const double dir = clockwise_ ? -1.0 : 1.0;
      const double a = phase_ + dir * speed_ / radius_ * t;
      return {center_.x() + radius_ * std::cos(a), center_.y() + radius_ * std::sin(a),
              wrap_angle(a + dir * kPi / 2)};
    }
    case Kind::kWaypoints: {
      if (t <= points_.front().t) return points_.front().pose;
      if (t >= points_.back().t) return points_.back().pose;
      auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                 [](double v, const Waypoint& w) { return v < w.t; });
      const Waypoint& b = *it;
      const Waypoint& a = *(it - 1);
      const double u = (t - a.t) / (b.t - a.t);
      const double dh = wrap_angle(b.pose.heading - a.pose.heading);
      return {a.pose.x + u * (b.pose.x - a.pose.x), a.pose.y + u * (b.pose.y - a.pose.y),
              wrap_angle(a.pose.heading + u * dh)};
    }
  }
  return {};
}

std::vector<Ellipsoid> make_clutter_blobs(std::uint64_t seed, int count, const Vec2& extent,
                                          double max_height, double min_radius, double max_radius,
                                          double min_bottom) {
  if (count <= 0) throw InvalidInput("clutter needs at least one blob");
  if (!(max_radius >= min_radius) || !(min_radius > 0.0)) throw InvalidInput("bad clutter radii");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Ellipsoid> blobs;
  blobs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Ellipsoid e;
    e.radii = Vec3(min_radius + (max_radius - min_radius) * u01(rng),
                   min_radius + (max_radius - min_radius) * u01(rng),
                   min_radius + (max_radius - min_radius) * u01(rng));
    const double lo = min_bottom + e.radii.z();
    const double hi = std::max(lo, max_height - e.radii.z());
    e.center = Vec3((u01(rng) - 0.5) * extent.x(), (u01(rng) - 0.5) * extent.y(),
                    lo + (hi - lo) * u01(rng));
    e.yaw = kPi * u01(rng);
    blobs.push_back(e);
  }
  return blobs;
}

void SensorModel::validate() const {
  if (!(azimuth_step > 0.0) || !(elevation_step > 0.0) || elevation_rows <= 0 ||
      !(azimuth_fov > 0.0)) {
    throw InvalidInput("sensor steps and field of view must be positive");
  }
  if (!(range_noise >= 0.0) || !(max_range > 0.0) || !(frame_rate > 0.0)) {
    throw InvalidInput("sensor noise, range and frame rate must be valid");
  }
}

RenderedFrame render_frame(const Scene& scene, double t, int frame_id) {
  const SensorModel& sm = scene.sensor;
  sm.validate();
  const Pose2 sp = sm.trajectory.at(t);
  const Vec3 origin(sp.x, sp.y, sm.height);

  std::vector<PlacedObject> placed;
  placed.reserve(scene.objects.size());
  RenderedFrame out;
  for (const auto& obj : scene.objects) {
    const Pose2 pose = obj.trajectory.at(t);
    placed.push_back({&obj, pose, object_reach(obj)});

    ObjectTruth truth;
    truth.id = obj.id;
    truth.kind = obj.kind;
    truth.pose = pose;
    truth.length = obj.length;
    truth.width = obj.width;
    truth.height = obj.height;
    truth.beta = wrap_angle(pose.heading - std::atan2(sp.y - pose.y, sp.x - pose.x));
    // Sensor direction in the target frame is (cos beta, -sin beta).
    truth.front_visible = std::cos(truth.beta) > 0.0;
    truth.rear_visible = std::cos(truth.beta) < 0.0;
    truth.right_visible = -std::sin(truth.beta) > 0.0;
    truth.left_visible = -std::sin(truth.beta) < 0.0;
    out.truth.push_back(truth);
  }

  const int n_az = static_cast<int>(std::floor(sm.azimuth_fov / sm.azimuth_step + 1e-9)) + 1;
  const int n_el = sm.elevation_rows;
  const std::ptrdiff_t n_rays = static_cast<std::ptrdiff_t>(n_az) * n_el;
  std::vector<Hit> hits(static_cast<std::size_t>(n_rays));
  std::vector<Vec3> points(static_cast<std::size_t>(n_rays));
  const std::uint64_t frame_seed = mix(scene.seed, static_cast<std::uint64_t>(frame_id));

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ray = 0; ray < n_rays; ++ray) {
    const int el_idx = static_cast<int>(ray / n_az);
    const int az_idx = static_cast<int>(ray % n_az);
    const double az = sp.heading - 0.5 * sm.azimuth_fov + az_idx * sm.azimuth_step;
    const double el = sm.elevation_top - el_idx * sm.elevation_step;
    const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    Hit h = cast_ray(origin, dir, placed);
    if (!(h.t <= sm.max_range)) {
      h.t = kInf;
    } else if (sm.range_noise > 0.0) {
      SplitMix64 gen(mix(frame_seed, static_cast<std::uint64_t>(ray)));
      std::normal_distribution<double> noise(0.0, sm.range_noise);
      const double e = std::clamp(noise(gen), -6.0 * sm.range_noise, 6.0 * sm.range_noise);
      h.t += e;
    }
    hits[static_cast<std::size_t>(ray)] = h;
    points[static_cast<std::size_t>(ray)] = origin + h.t * dir;
  }

  out.frame.frame_id = frame_id;
  out.frame.timestamp = t;
  out.frame.sensor = {origin.x(), origin.y(), origin.z()};
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!std::isfinite(hits[i].t)) continue;
    const Vec3& p = points[i];
    out.frame.points.push_back({p.x(), p.y(), p.z(), frame_id});
    out.frame.labels.push_back(hits[i].label);
    out.faces.push_back(hits[i].face);
  }
  return out;
}

std::vector<RenderedFrame> render_sequence(const Scene& scene, double duration) {
  const double rate = scene.sensor.frame_rate;
  const int n = static_cast<int>(std::lround(duration * rate));
  std::vector<RenderedFrame> frames;
  frames.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) frames.push_back(render_frame(scene, k / rate, k));
  return frames;
}

const char* to_string(ObjectKind kind) {
  return kind == ObjectKind::kVehicle ? "vehicle" : "clutter";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "vehicle") return ObjectKind::kVehicle;
  if (s == "clutter") return ObjectKind::kClutter;
  throw InvalidInput("unknown object kind: " + s);
}

}  // namespace vdamf
