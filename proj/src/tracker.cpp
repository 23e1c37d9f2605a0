#include "vdamf/tracker.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

namespace vdamf {

const char* to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::kTentative:
      return "tentative";
    case TrackStatus::kConfirmed:
      return "confirmed";
    case TrackStatus::kDead:
      return "dead";
  }
  return "unknown";
}

void TrackerConfig::validate() const {
  if (!(gate > 0.0)) throw InvalidInput("tracker gate must be positive");
  if (confirm_hits <= 0 || miss_limit <= 0) {
    throw InvalidInput("confirm_hits and miss_limit must be positive");
  }
  if (!(meas_pos_floor >= 0.0) || !(meas_heading_floor >= 0.0) || !(accel_std >= 0.0) || !(yaw_accel_std >= 0.0) || !(init_speed_std > 0.0) ||
      !(init_yaw_rate_std > 0.0)) {
    throw InvalidInput("tracker noise parameters must be valid");
  }
  if (!(scan.sigma > 0.0) || !(scan.cluster_gap > 0.0) || !(scan.ground_margin >= 0.0)) {
    throw InvalidInput("scan parameters must be positive");
  }
  optimizer.validate();
  uncertainty.validate();
  visibility.validate();
}

Vec2 Track::size_estimate() const {
  if (!size_memory.empty()) return {size_memory.robust_l(), size_memory.robust_w()};
  if (last_measurement) return {last_measurement->state.l, last_measurement->state.w};
  return {1.0, 1.0};
}

double distance_to_track(const Vec2& point, const Track& track) {
  const Vec2 size = track.size_estimate();
  const Vec2 local = rotation(-track.kin[kKinHeading]) * (point - track.position());
  const double ex = std::max(std::abs(local.x()) - 0.5 * size.x(), 0.0);
  const double ey = std::max(std::abs(local.y()) - 0.5 * size.y(), 0.0);
  return std::hypot(ex, ey);
}

Assignment assign(std::span<const Cluster> clusters, std::span<const Track> tracks, double gate) {
  if (!(gate > 0.0)) throw InvalidInput("assign: gate must be positive");
  std::vector<std::tuple<double, std::size_t, int>> bids;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const Vec2 centroid = clusters[c].centroid();
    for (const auto& t : tracks) {
      if (t.status == TrackStatus::kDead) continue;
      const double d = distance_to_track(centroid, t);
      if (d <= gate) bids.emplace_back(d, c, t.id);
    }
  }
  std::sort(bids.begin(), bids.end());
  Assignment out;
  std::vector<bool> taken(clusters.size(), false);
  for (const auto& [d, c, id] : bids) {
    if (taken[c]) continue;
    taken[c] = true;
    out.pairs.emplace_back(c, id);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (!taken[c]) out.unassigned_clusters.push_back(c);
  }
  return out;
}

void predict(Track& track, double dt, const TrackerConfig& cfg) {
  if (!(dt >= 0.0)) throw InvalidInput("predict: dt must be nonnegative");
  if (dt == 0.0) return;
  Vec5& s = track.kin;
  const double psi = s[kKinHeading];
  const double v = s[kKinSpeed];
  const double w = s[kKinYawRate];
  const double psi2 = psi + w * dt;
  Mat5 f = Mat5::Identity();
  if (std::abs(w) > 1e-4) {
    const double ds = std::sin(psi2) - std::sin(psi);
    const double dc = std::cos(psi) - std::cos(psi2);
    s[kKinX] += v / w * ds;
    s[kKinY] += v / w * dc;
    f(kKinX, kKinHeading) = v / w * (std::cos(psi2) - std::cos(psi));
    f(kKinX, kKinSpeed) = ds / w;
    f(kKinX, kKinYawRate) = v * dt * std::cos(psi2) / w - v * ds / (w * w);
    f(kKinY, kKinHeading) = v / w * ds;
    f(kKinY, kKinSpeed) = dc / w;
    f(kKinY, kKinYawRate) = v * dt * std::sin(psi2) / w - v * dc / (w * w);
  } else {
    const double c = std::cos(psi);
    const double sn = std::sin(psi);
    s[kKinX] += v * dt * c;
    s[kKinY] += v * dt * sn;
    f(kKinX, kKinHeading) = -v * dt * sn;
    f(kKinX, kKinSpeed) = dt * c;
    f(kKinX, kKinYawRate) = -0.5 * v * dt * dt * sn;
    f(kKinY, kKinHeading) = v * dt * c;
    f(kKinY, kKinSpeed) = dt * sn;
    f(kKinY, kKinYawRate) = 0.5 * v * dt * dt * c;
  }
  f(kKinHeading, kKinYawRate) = dt;
  s[kKinHeading] = wrap_angle(psi2);

  Eigen::Matrix<double, 5, 2> g = Eigen::Matrix<double, 5, 2>::Zero();
  g(kKinX, 0) = 0.5 * dt * dt * std::cos(psi);
  g(kKinY, 0) = 0.5 * dt * dt * std::sin(psi);
  g(kKinHeading, 1) = 0.5 * dt * dt;
  g(kKinSpeed, 0) = dt;
  g(kKinYawRate, 1) = dt;
  const Eigen::Vector2d q(cfg.accel_std * cfg.accel_std, cfg.yaw_accel_std * cfg.yaw_accel_std);
  Mat5 p = f * track.kin_cov * f.transpose() + g * q.asDiagonal() * g.transpose();
  track.kin_cov = 0.5 * (p + p.transpose());
}

namespace {

void require_psd(const Mat3& m) {
  if (!m.allFinite()) throw InvalidInput("measurement covariance is not finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidInput("measurement covariance is not symmetric");
  }
  const double lo = Eigen::SelfAdjointEigenSolver<Mat3>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (lo < -1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidInput("measurement covariance is not positive semi-definite");
  }
}

// Reverse the heading when the filter settles on driving backwards.
void normalize_direction(Track& track, const TrackerConfig& cfg) {
  if (track.kin[kKinSpeed] >= cfg.reverse_speed) return;
  track.kin[kKinHeading] = wrap_angle(track.kin[kKinHeading] + kPi);
  track.kin[kKinSpeed] = -track.kin[kKinSpeed];
  Mat5 j = Mat5::Identity();
  j(kKinSpeed, kKinSpeed) = -1.0;
  track.kin_cov = j * track.kin_cov * j.transpose();
}

}  // namespace

void correct(Track& track, const Measurement& meas, const TrackerConfig& cfg) {
  require_psd(meas.pose_cov);
  Eigen::Matrix<double, 3, 5> h = Eigen::Matrix<double, 3, 5>::Zero();
  h(0, kKinX) = 1.0;
  h(1, kKinY) = 1.0;
  h(2, kKinHeading) = 1.0;
  const double psi = track.kin[kKinHeading];
  Vec3 innov;
  innov << meas.state.tx - track.kin[kKinX], meas.state.ty - track.kin[kKinY],
      axis_difference(meas.state.theta, psi);
  Mat3 r = meas.pose_cov;
  r(0, 0) += cfg.meas_pos_floor * cfg.meas_pos_floor;
  r(1, 1) += cfg.meas_pos_floor * cfg.meas_pos_floor;
  r(2, 2) += cfg.meas_heading_floor * cfg.meas_heading_floor;
  const Mat5& p = track.kin_cov;
  const Mat3 s = h * p * h.transpose() + r;
  const Eigen::Matrix<double, 5, 3> k = p * h.transpose() * s.inverse();
  track.kin += k * innov;
  track.kin[kKinHeading] = wrap_angle(track.kin[kKinHeading]);
  const Mat5 ikh = Mat5::Identity() - k * h;
  Mat5 np = ikh * p * ikh.transpose() + k * r * k.transpose();
  track.kin_cov = 0.5 * (np + np.transpose());
  normalize_direction(track, cfg);
}

Track spawn_track(int id, const Measurement& meas, double time, const TrackerConfig& cfg) {
  require_psd(meas.pose_cov);
  Track t;
  t.id = id;
  t.size_memory = SizeMemory(cfg.visibility.history);
  t.kin << meas.state.tx, meas.state.ty, meas.state.theta, 0.0, 0.0;
  t.kin_cov = Mat5::Zero();
  t.kin_cov.topLeftCorner<3, 3>() = meas.pose_cov;
  t.kin_cov(kKinSpeed, kKinSpeed) = cfg.init_speed_std * cfg.init_speed_std;
  t.kin_cov(kKinYawRate, kKinYawRate) = cfg.init_yaw_rate_std * cfg.init_yaw_rate_std;
  t.size_memory.add(meas.state.l, meas.state.w);
  t.last_measurement = meas;
  t.age = 1;
  t.hit_streak = 1;
  t.last_time = time;
  if (t.hit_streak >= cfg.confirm_hits) t.status = TrackStatus::kConfirmed;
  return t;
}

Measurement measure(const Cluster& cluster, const MatchState& init, const SensorOrigin& sensor,
                    const SizeMemory& memory, const TrackerConfig& cfg) {
  const FitResult fr = fit(cluster, init, sensor, cfg.optimizer, cfg.weights);
  Measurement m = make_measurement(fr, cfg.uncertainty);
  // The fit is symmetric under a half turn; keep front/rear labels on the track's sense.
  if (std::abs(wrap_angle(m.state.theta - init.theta)) > kPi / 2.0) {
    m.state.theta = wrap_angle(m.state.theta + kPi);
  }
  m.visible_edges = detect_visibility_loss(m, memory, cfg.visibility);
  if (cfg.visibility.mask_enabled) {
    m.pose_cov = mask_covariance(m.pose_cov, m.visible_edges, m.state);
  }
  return m;
}

void apply_measurement(Track& track, const Measurement& meas, const SensorOrigin& sensor,
                       const TrackerConfig& cfg) {
  Vec2 offset = Vec2::Zero();
  if (cfg.visibility.anchor_enabled) offset = anchor_correction(meas, track.size_memory, sensor);
  track.kin.head<2>() -= offset;
  correct(track, meas, cfg);
  track.kin.head<2>() += offset;
  track.last_anchor_offset = offset;
  const VisibleEdges& v = meas.visible_edges;
  track.size_memory.observe(meas.state.l, meas.state.w, !v.front || !v.rear, !v.right || !v.left);
  track.last_measurement = meas;
  track.missed_count = 0;
  ++track.hit_streak;
  if (track.status == TrackStatus::kTentative && track.hit_streak >= cfg.confirm_hits) {
    track.status = TrackStatus::kConfirmed;
  }
}

void update(Track& track, Measurement meas, double dt, const SensorOrigin& sensor,
            const TrackerConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidInput("update: dt must be positive");
  predict(track, dt, cfg);
  track.last_time += dt;
  ++track.age;
  meas.visible_edges = detect_visibility_loss(meas, track.size_memory, cfg.visibility);
  if (cfg.visibility.mask_enabled) {
    meas.pose_cov = mask_covariance(meas.pose_cov, meas.visible_edges, meas.state);
  }
  apply_measurement(track, meas, sensor, cfg);
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

FrameResult Tracker::step_frame(const Frame& frame) {
  if (last_time_ && !(frame.timestamp > *last_time_)) {
    throw InvalidInput("frame timestamps must be strictly increasing");
  }
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point a) {
    return std::chrono::duration<double, std::milli>(Clock::now() - a).count();
  };
  const auto t_start = Clock::now();
  FrameTiming timing;
  const double dt = last_time_ ? frame.timestamp - *last_time_ : 0.0;
  last_time_ = frame.timestamp;
  const SensorOrigin& sensor = frame.sensor;

  // Drop tracks that died on the previous frame, then predict the rest.
  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::kDead; });
  for (auto& t : tracks_) {
    predict(t, dt, cfg_);
    t.last_time = frame.timestamp;
    ++t.age;
  }

  auto t_stage = Clock::now();
  std::vector<Cluster> clusters;
  if (!frame.points.empty()) {
    const auto above = remove_ground(frame, cfg_.ground_height, cfg_.scan.ground_margin);
    clusters = cluster_points(above, cfg_.scan.cluster_gap, cfg_.scan.sigma);
  }
  timing.segment_ms = ms_since(t_stage);
  t_stage = Clock::now();
  const Assignment asg = assign(clusters, tracks_, cfg_.gate);

  // Per-track merged clusters, in track order.
  std::vector<std::vector<const Cluster*>> parts(tracks_.size());
  for (const auto& [c, id] : asg.pairs) {
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      if (tracks_[k].id == id) parts[k].push_back(&clusters[c]);
    }
  }

  timing.assign_ms = ms_since(t_stage);
  t_stage = Clock::now();

  // Fits are pure; run them concurrently into pre-sized slots.
  const auto nt = static_cast<std::ptrdiff_t>(tracks_.size());
  std::vector<std::optional<Measurement>> meas(tracks_.size());
  std::vector<std::vector<ScanPoint>> pts(tracks_.size());
  std::vector<std::exception_ptr> errors(tracks_.size());
#pragma omp parallel for schedule(dynamic) if (cfg_.parallel_fits)
  for (std::ptrdiff_t k = 0; k < nt; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (parts[ku].empty()) continue;
    try {
      const Track& t = tracks_[ku];
      const Cluster merged = Cluster::merge(parts[ku]);
      pts[ku] = merged.points();
      const Vec2 size = t.size_estimate();
      MatchState init;
      init.tx = t.kin[kKinX];
      init.ty = t.kin[kKinY];
      init.theta = t.kin[kKinHeading];
      const SizeBounds& b = cfg_.optimizer.size_bounds;
      init.l = std::clamp(size.x(), b.l_min, b.l_max);
      init.w = std::clamp(size.y(), b.w_min, b.w_max);
      meas[ku] = measure(merged, init, sensor, t.size_memory, cfg_);
    } catch (...) {
      errors[ku] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  timing.fit_ms = ms_since(t_stage);
  t_stage = Clock::now();

  FrameResult out;
  out.frame_id = frame.frame_id;
  out.timestamp = frame.timestamp;
  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    Track& t = tracks_[k];
    if (meas[k]) {
      apply_measurement(t, *meas[k], sensor, cfg_);
    } else {
      ++t.missed_count;
      t.hit_streak = 0;
      if (t.missed_count >= cfg_.miss_limit) t.status = TrackStatus::kDead;
    }
  }

  for (std::size_t c : asg.unassigned_clusters) {
    const Cluster& cl = clusters[c];
    if (cl.size() < cfg_.min_cluster_points) continue;
    const double phi = viewing_angle(cl, sensor);
    const MatchState init = initialize_state(cl, phi, cfg_.optimizer.size_bounds);
    OptimizerConfig seed_cfg = cfg_.optimizer;
    seed_cfg.enforce_length_axis = true;
    Measurement m =
        make_measurement(fit(cl, init, sensor, seed_cfg, cfg_.weights), cfg_.uncertainty);
    Track t = spawn_track(next_id_++, m, frame.timestamp, cfg_);
    tracks_.push_back(std::move(t));
    pts.push_back(cl.points());
    meas.emplace_back(m);
  }

  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    const Track& t = tracks_[k];
    TrackReport r;
    r.id = t.id;
    r.kin = t.kin;
    r.cov_diag = t.kin_cov.diagonal();
    const Vec2 size = t.size_estimate();
    r.length = size.x();
    r.width = size.y();
    r.status = t.status;
    r.measurement = meas[k];
    r.cluster_points = pts[k].size();
    r.points = std::move(pts[k]);
    out.tracks.push_back(std::move(r));
  }
  timing.update_ms = ms_since(t_stage);
  timing.total_ms = ms_since(t_start);
  out.timing = timing;
  return out;
}

}  // namespace vdamf
