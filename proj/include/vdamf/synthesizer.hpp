#pragma once

#include "vdamf/scan_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vdamf {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct Waypoint {
  double t = 0.0;
  Pose2 pose;
};

/// Planar pose as a function of time.
class Trajectory {
 public:
  enum class Kind { kStatic, kWaypoints, kCircle };

  static Trajectory fixed(const Pose2& pose);
  /// Piecewise-linear interpolation; heading interpolates along the shorter arc.
  /// Times must be strictly increasing. Holds the end poses outside the range.
  static Trajectory waypoints(std::vector<Waypoint> points);
  /// Constant-speed circle; heading is tangent to the motion.
  static Trajectory circle(const Vec2& center, double radius, double speed, double phase,
                           bool clockwise = false);

  Pose2 at(double t) const;
  Kind kind() const { return kind_; }

  const std::vector<Waypoint>& points() const { return points_; }
  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  double speed() const { return speed_; }
  double phase() const { return phase_; }
  bool clockwise() const { return clockwise_; }

 private:
  Kind kind_ = Kind::kStatic;
  std::vector<Waypoint> points_;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  double speed_ = 0.0;
  double phase_ = 0.0;
  bool clockwise_ = false;
};

/// Ellipsoid in the owning object's frame (x forward, z up from the ground).
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 radii = Vec3::Ones();
  double yaw = 0.0;
};

enum class ObjectKind { kVehicle, kClutter };

struct SceneObject {
  int id = 0;
  ObjectKind kind = ObjectKind::kVehicle;
  Trajectory trajectory;
  // Vehicle box footprint and vertical extent [clearance, height].
  double length = 4.5;
  double width = 1.8;
  double height = 1.6;
  double clearance = 0.4;
  std::vector<Ellipsoid> blobs;  // clutter only
};

/// A clutter object: `count` random ellipsoids spread over a footprint.
/// Every ellipsoid sits at least `min_bottom` above the ground.
std::vector<Ellipsoid> make_clutter_blobs(std::uint64_t seed, int count, const Vec2& extent,
                                          double max_height, double min_radius, double max_radius,
                                          double min_bottom = 0.4);

struct SensorModel {
  Trajectory trajectory;  // heading is the azimuth boresight
  double height = 2.0;
  double azimuth_fov = deg2rad(120.0);
  double azimuth_step = deg2rad(0.25);
  double elevation_top = deg2rad(1.0);
  int elevation_rows = 8;
  double elevation_step = deg2rad(1.0);
  double range_noise = 0.03;
  double max_range = 80.0;
  double frame_rate = 10.0;

  void validate() const;
};

struct Scene {
  std::vector<SceneObject> objects;
  SensorModel sensor;
  std::uint64_t seed = 0;
};

enum class BoxFace : std::int8_t { kNone = -1, kFront, kRear, kRight, kLeft, kTop, kBottom };

/// Ground-truth pose and analytic edge visibility of an object in one frame.
/// Faces follow the target-frame convention: front = +x, right = +y.
struct ObjectTruth {
  int id = 0;
  ObjectKind kind = ObjectKind::kVehicle;
  Pose2 pose;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double beta = 0.0;  // heading minus the bearing from object to sensor
  bool front_visible = false;
  bool rear_visible = false;
  bool right_visible = false;
  bool left_visible = false;
};

struct RenderedFrame {
  Frame frame;
  std::vector<ObjectTruth> truth;
  /// Box face hit by each ray (kNone for ground and clutter), parallel to points.
  std::vector<BoxFace> faces;
};

RenderedFrame render_frame(const Scene& scene, double t, int frame_id);

/// Frames at t = k / frame_rate for k < round(duration * frame_rate).
std::vector<RenderedFrame> render_sequence(const Scene& scene, double duration);

const char* to_string(ObjectKind kind);
ObjectKind object_kind_from_string(const std::string& s);

}  // namespace vdamf
