#pragma once

#include "vdamf/visibility.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace vdamf {

enum class TrackStatus { kTentative, kConfirmed, kDead };

const char* to_string(TrackStatus status);

/// Kinematic state layout: (x, y, heading, speed, yaw_rate).
enum KinIndex { kKinX = 0, kKinY, kKinHeading, kKinSpeed, kKinYawRate };

struct TrackerConfig {
  double ground_height = 0.0;
  ScanConfig scan;
  double gate = 2.0;
  int confirm_hits = 3;
  int miss_limit = 5;
  /// Clusters smaller than this never seed a track.
  std::size_t min_cluster_points = 3;
  double accel_std = 1.0;      // m/s^2
  double yaw_accel_std = 0.5;  // rad/s^2
  double init_speed_std = 5.0;
  double init_yaw_rate_std = 0.5;
  /// Speeds below this are treated as a reversed heading.
  double reverse_speed = -0.5;
  /// Standard deviations added to every pose measurement covariance. The
  /// fitted covariance reflects range noise only, not model bias.
  double meas_pos_floor = 0.1;       // m
  double meas_heading_floor = 0.05;  // rad
  /// Run the per-track fits with OpenMP. Serial runs give identical results.
  bool parallel_fits = true;
  OptimizerConfig optimizer;
  UncertaintyConfig uncertainty;
  VisibilityConfig visibility;
  FilterWeights weights;

  void validate() const;
};

struct Track {
  int id = 0;
  Vec5 kin = Vec5::Zero();
  Mat5 kin_cov = Mat5::Identity();
  SizeMemory size_memory;
  std::optional<Measurement> last_measurement;
  int age = 0;          // frames since creation
  int hit_streak = 0;   // consecutive associated frames
  int missed_count = 0; // consecutive missed frames
  TrackStatus status = TrackStatus::kTentative;
  double last_time = 0.0;
  /// Corner-anchor offset applied at the last update (world frame).
  Vec2 last_anchor_offset = Vec2::Zero();

  Vec2 position() const { return kin.head<2>(); }
  /// Length and width used for gating and fit initialization.
  Vec2 size_estimate() const;
};

struct Assignment {
  std::vector<std::pair<std::size_t, int>> pairs;  // (cluster index, track id)
  std::vector<std::size_t> unassigned_clusters;
};

/// Distance from a point to a track's predicted rectangle (zero inside).
double distance_to_track(const Vec2& point, const Track& track);

/// Greedy nearest-first auction: every (cluster, live track) pair whose
/// centroid-to-rectangle distance is within the gate is ranked by distance,
/// and each cluster goes to the first track that bids for it. A track can win
/// several clusters.
Assignment assign(std::span<const Cluster> clusters, std::span<const Track> tracks, double gate);

/// CTRV prediction over dt (dt >= 0).
void predict(Track& track, double dt, const TrackerConfig& cfg);

/// EKF correction with h(kin) = (x, y, heading). The measured orientation is
/// aligned to the track heading modulo pi and the heading innovation wrapped.
void correct(Track& track, const Measurement& meas, const TrackerConfig& cfg);

/// Track from a first measurement.
Track spawn_track(int id, const Measurement& meas, double time, const TrackerConfig& cfg);

/// Full per-measurement update: predict over dt, then apply the measurement
/// (visibility detection, anchor offset, correction, size memory).
void update(Track& track, Measurement meas, double dt, const SensorOrigin& sensor,
            const TrackerConfig& cfg);

/// Measurement step without prediction; `meas` must already carry visibility
/// flags and the masked covariance.
void apply_measurement(Track& track, const Measurement& meas, const SensorOrigin& sensor,
                       const TrackerConfig& cfg);

/// Fits a cluster and turns the result into a masked measurement for a track.
Measurement measure(const Cluster& cluster, const MatchState& init, const SensorOrigin& sensor,
                    const SizeMemory& memory, const TrackerConfig& cfg);

struct TrackReport {
  int id = 0;
  Vec5 kin = Vec5::Zero();
  Vec5 cov_diag = Vec5::Zero();
  double length = 0.0;
  double width = 0.0;
  TrackStatus status = TrackStatus::kTentative;
  std::optional<Measurement> measurement;  // this frame's, if associated
  std::size_t cluster_points = 0;
  /// Hits associated this frame (empty when coasting).
  std::vector<ScanPoint> points;
};

/// Wall time spent in each stage of a frame, in milliseconds.
struct FrameTiming {
  double segment_ms = 0.0;  // ground removal and clustering
  double assign_ms = 0.0;
  double fit_ms = 0.0;      // fits, covariances and visibility handling
  double update_ms = 0.0;   // filter updates, spawning and reporting
  double total_ms = 0.0;
};

struct FrameResult {
  int frame_id = 0;
  double timestamp = 0.0;
  std::vector<TrackReport> tracks;
  FrameTiming timing;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  /// Runs ground removal, clustering, assignment, fitting, visibility handling
  /// and the filter update for one frame. Timestamps must increase.
  FrameResult step_frame(const Frame& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<double> last_time_;
};

}  // namespace vdamf
