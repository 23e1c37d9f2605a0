#pragma once

#include "vdamf/synthesizer.hpp"

namespace vdamf::scenarios {

/// Sensor at the origin, 2 m up, boresight along +x, with the given range
/// noise. Every scenario below uses it.
SensorModel default_sensor(double range_noise = 0.03);

/// One stationary vehicle.
Scene single_vehicle(const Pose2& pose, std::uint64_t seed = 0, double range_noise = 0.03);

/// A vehicle driving a straight line across the field of view at `speed`.
Scene constant_velocity(double speed = 5.0, std::uint64_t seed = 0, double range_noise = 0.05);

/// A vehicle circling a point 20 m ahead of the sensor.
Scene circling(double radius = 10.0, double speed = 3.0, std::uint64_t seed = 0,
               double range_noise = 0.03);

/// A stationary vehicle 15 m ahead that holds a broadside view for
/// `hold_before` frames, rotates in place to a rear-only view over
/// `rotate_frames`, then holds for `hold_after` frames (10 Hz).
Scene rotating_in_place(int rotate_frames = 50, int hold_before = 10, int hold_after = 10,
                        std::uint64_t seed = 0, double range_noise = 0.03);

/// `count` vehicles spread over the field of view between 10 and 60 m, a
/// mix of parked and slowly moving, heading along the world axes with up to
/// 15 degrees of skew.
Scene many_targets(int count = 50, std::uint64_t seed = 0, double range_noise = 0.03);

/// A clutter object (bush/tree-like ellipsoid group) standing at `pose`.
SceneObject clutter_object(int id, const Pose2& pose, std::uint64_t seed);

/// A vehicle with randomized footprint and height standing at `pose`.
SceneObject random_vehicle(int id, const Pose2& pose, std::uint64_t seed);

/// One object of the given kind at a random range in [8, 35] m, bearing
/// within 50 degrees of boresight and uniform heading. Used to build
/// classifier training and test sets.
Scene classification_scene(ObjectKind kind, std::uint64_t seed, double range_noise = 0.03);

}  // namespace vdamf::scenarios
