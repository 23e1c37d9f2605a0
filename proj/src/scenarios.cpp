#include "vdamf/scenarios.hpp"

#include <random>

namespace vdamf::scenarios {

SensorModel default_sensor(double range_noise) {
  SensorModel s;
  s.trajectory = Trajectory::fixed({0.0, 0.0, 0.0});
  s.range_noise = range_noise;
  return s;
}

Scene single_vehicle(const Pose2& pose, std::uint64_t seed, double range_noise) {
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  SceneObject v;
  v.id = 1;
  v.trajectory = Trajectory::fixed(pose);
  sc.objects.push_back(v);
  return sc;
}

Scene constant_velocity(double speed, std::uint64_t seed, double range_noise) {
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  SceneObject v;
  v.id = 1;
  // Crosses the boresight 20 m out, heading +y.
  const double y0 = -15.0;
  const double duration = 60.0;
  v.trajectory = Trajectory::waypoints(
      {{0.0, {20.0, y0, kPi / 2}}, {duration, {20.0, y0 + speed * duration, kPi / 2}}});
  sc.objects.push_back(v);
  return sc;
}

Scene circling(double radius, double speed, std::uint64_t seed, double range_noise) {
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  SceneObject v;
  v.id = 1;
  v.trajectory = Trajectory::circle({20.0, 0.0}, radius, speed, kPi);
  sc.objects.push_back(v);
  return sc;
}

Scene rotating_in_place(int rotate_frames, int hold_before, int hold_after, std::uint64_t seed,
                        double range_noise) {
  if (rotate_frames <= 0 || hold_before < 0 || hold_after < 0) {
    throw InvalidInput("rotating_in_place: frame counts must be nonnegative");
  }
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  const double dt = 1.0 / sc.sensor.frame_rate;
  const double t0 = hold_before * dt;
  const double t1 = (hold_before + rotate_frames) * dt;
  const double t2 = t1 + hold_after * dt + 1.0;
  // Heading -pi/2 shows the right side to a sensor on -x; heading 0 shows the rear.
  const Pose2 side{15.0, 0.0, -kPi / 2};
  const Pose2 rear{15.0, 0.0, 0.0};
  std::vector<Waypoint> wp = {{0.0, side}};
  if (t0 > 0.0) wp.push_back({t0, side});
  wp.push_back({t1, rear});
  wp.push_back({t2, rear});
  SceneObject v;
  v.id = 1;
  v.trajectory = Trajectory::waypoints(std::move(wp));
  sc.objects.push_back(v);
  return sc;
}

Scene many_targets(int count, std::uint64_t seed, double range_noise) {
  if (count <= 0) throw InvalidInput("many_targets: count must be positive");
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double fov = deg2rad(100.0);
  int id = 1;
  for (double r = 10.0; id <= count && r <= 70.0; r += 8.0) {
    const int slots = std::max(1, static_cast<int>(r * fov / 8.0));
    for (int k = 0; k < slots && id <= count; ++k) {
      // Stagger alternate rings so nearer targets do not shadow farther ones.
      const double offset = (static_cast<int>(r) / 8) % 2 == 0 ? 0.25 : 0.75;
      const double bearing = -0.5 * fov + fov * (k + offset) / slots;
      // Lane-aligned: one of the four axis directions with up to 15 degrees of skew.
      const double lane = 0.5 * kPi * std::floor(4.0 * u01(rng));
      const double heading = wrap_angle(lane + deg2rad(15.0) * (2.0 * u01(rng) - 1.0));
      const Pose2 p{r * std::cos(bearing), r * std::sin(bearing), heading};
      SceneObject v;
      v.id = id++;
      v.length = 4.0 + 1.0 * u01(rng);
      v.width = 1.7 + 0.3 * u01(rng);
      if (u01(rng) < 0.5) {
        v.trajectory = Trajectory::fixed(p);
      } else {
        const double speed = 0.5 + 1.5 * u01(rng);
        const double horizon = 30.0;
        v.trajectory = Trajectory::waypoints(
            {{0.0, p},
             {horizon,
              {p.x + speed * horizon * std::cos(p.heading), p.y + speed * horizon * std::sin(p.heading),
               p.heading}}});
      }
      sc.objects.push_back(v);
    }
  }
  return sc;
}

SceneObject clutter_object(int id, const Pose2& pose, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SceneObject c;
  c.id = id;
  c.kind = ObjectKind::kClutter;
  c.trajectory = Trajectory::fixed(pose);
  const int blobs = 2 + static_cast<int>(u01(rng) * 5.0);
  const Vec2 extent(1.0 + 3.0 * u01(rng), 1.0 + 2.0 * u01(rng));
  const double max_height = 1.5 + 3.0 * u01(rng);
  c.blobs = make_clutter_blobs(seed ^ 0x5bd1e995ULL, blobs, extent, max_height, 0.3, 1.2);
  c.length = extent.x();
  c.width = extent.y();
  c.height = max_height;
  return c;
}

SceneObject random_vehicle(int id, const Pose2& pose, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SceneObject v;
  v.id = id;
  v.kind = ObjectKind::kVehicle;
  v.trajectory = Trajectory::fixed(pose);
  v.length = 3.6 + 2.0 * u01(rng);
  v.width = 1.6 + 0.5 * u01(rng);
  v.height = 1.3 + 0.7 * u01(rng);
  v.clearance = 0.25 + 0.25 * u01(rng);
  return v;
}

Scene classification_scene(ObjectKind kind, std::uint64_t seed, double range_noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double range = 8.0 + 27.0 * u01(rng);
  const double bearing = deg2rad(-50.0 + 100.0 * u01(rng));
  const double heading = -kPi + 2.0 * kPi * u01(rng);
  const Pose2 pose{range * std::cos(bearing), range * std::sin(bearing), heading};
  const std::uint64_t object_seed = rng();
  Scene sc;
  sc.seed = seed;
  sc.sensor = default_sensor(range_noise);
  sc.objects.push_back(kind == ObjectKind::kVehicle ? random_vehicle(1, pose, object_seed)
                                                    : clutter_object(1, pose, object_seed));
  return sc;
}

}  // namespace vdamf::scenarios
