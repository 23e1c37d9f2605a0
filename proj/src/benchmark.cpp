#include "vdamf/benchmark.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace vdamf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

std::vector<ScanPoint> stride_subsample(const std::vector<ScanPoint>& points, std::size_t n) {
  if (points.size() <= n) return points;
  std::vector<ScanPoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(points[k * points.size() / n]);
  return out;
}

FitBenchReport bench_fits(const std::vector<Frame>& frames, const RunConfig& cfg,
                          std::size_t min_fits, std::size_t hits, bool single_thread) {
  if (hits == 0) throw InvalidInput("bench: hits per cluster must be positive");
  const TrackerConfig& tc = cfg.tracker;
  struct Job {
    Cluster cluster;
    SensorOrigin sensor;
  };
  std::vector<Job> jobs;
  for (const Frame& f : frames) {
    const auto above = remove_ground(f, tc.ground_height, tc.scan.ground_margin);
    for (const auto& c : cluster_points(above, tc.scan.cluster_gap, tc.scan.sigma)) {
      if (c.size() < hits) continue;
      jobs.push_back({Cluster(stride_subsample(c.points(), hits), tc.scan.sigma), f.sensor});
    }
  }
  if (jobs.empty()) throw InvalidInput("bench: no cluster has enough hits");

  const int saved = omp_get_max_threads();
  if (single_thread) omp_set_num_threads(1);
  std::vector<double> times;
  times.reserve(std::max(min_fits, jobs.size()));
  while (times.size() < min_fits) {
    for (const Job& j : jobs) {
      const auto t0 = Clock::now();
      const double phi = viewing_angle(j.cluster, j.sensor);
      const MatchState init = initialize_state(j.cluster, phi, tc.optimizer.size_bounds);
      const FitResult fr = fit(j.cluster, init, j.sensor, tc.optimizer, tc.weights);
      const Measurement m = make_measurement(fr, tc.uncertainty);
      const auto t1 = Clock::now();
      if (!std::isfinite(m.pose_cov(0, 0))) throw NumericalError("bench: non-finite covariance");
      times.push_back(elapsed_ms(t0, t1));
      if (times.size() >= min_fits) break;
    }
  }
  FitBenchReport r;
  r.threads = omp_get_max_threads();
  if (single_thread) omp_set_num_threads(saved);
  r.fits = times.size();
  r.clusters = jobs.size();
  r.hits_per_cluster = hits;
  double sum = 0.0;
  for (double t : times) sum += t;
  r.mean_ms = sum / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  r.median_ms = times[times.size() / 2];
  r.max_ms = times.back();
  return r;
}

TrackBenchReport bench_tracking(const std::vector<Frame>& frames, const RunConfig& cfg) {
  Tracker tracker(cfg.tracker);
  TrackBenchReport r;
  double targets = 0.0;
  for (const Frame& f : frames) {
    const auto t0 = Clock::now();
    const FrameResult res = tracker.step_frame(f);
    const double ms = elapsed_ms(t0, Clock::now());
    r.mean_frame_ms += ms;
    r.max_frame_ms = std::max(r.max_frame_ms, ms);
    for (const TrackReport& t : res.tracks) targets += t.measurement ? 1.0 : 0.0;
    r.mean_stage.segment_ms += res.timing.segment_ms;
    r.mean_stage.assign_ms += res.timing.assign_ms;
    r.mean_stage.fit_ms += res.timing.fit_ms;
    r.mean_stage.update_ms += res.timing.update_ms;
    r.mean_stage.total_ms += res.timing.total_ms;
    ++r.frames;
  }
  if (r.frames > 0) {
    const double n = static_cast<double>(r.frames);
    r.mean_frame_ms /= n;
    r.mean_targets = targets / n;
    r.mean_stage.segment_ms /= n;
    r.mean_stage.assign_ms /= n;
    r.mean_stage.fit_ms /= n;
    r.mean_stage.update_ms /= n;
    r.mean_stage.total_ms /= n;
  }
  return r;
}

}  // namespace vdamf
