#pragma once

#include "vdamf/io.hpp"

#include <cstddef>
#include <vector>

namespace vdamf {

struct FitBenchReport {
  std::size_t fits = 0;
  std::size_t clusters = 0;
  std::size_t hits_per_cluster = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
  int threads = 1;
};

/// Times fit plus covariance on object clusters subsampled to exactly `hits`
/// points, cycling over the clusters found in `frames` until at least
/// `min_fits` fits have run. Clusters with fewer hits are skipped. With
/// `single_thread` the OpenMP team is limited to one thread for the run.
FitBenchReport bench_fits(const std::vector<Frame>& frames, const RunConfig& cfg,
                          std::size_t min_fits = 1000, std::size_t hits = 100,
                          bool single_thread = true);

struct TrackBenchReport {
  std::size_t frames = 0;
  double mean_targets = 0.0;  // tracks with a measurement, per frame
  double mean_frame_ms = 0.0;
  double max_frame_ms = 0.0;
  FrameTiming mean_stage;
};

TrackBenchReport bench_tracking(const std::vector<Frame>& frames, const RunConfig& cfg);

/// Deterministic evenly strided subsample of `n` points (all if fewer).
std::vector<ScanPoint> stride_subsample(const std::vector<ScanPoint>& points, std::size_t n);

}  // namespace vdamf
