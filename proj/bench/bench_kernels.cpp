// Serial reference vs OpenMP kernels: the per-point match evaluation, the
// per-track fit stage of the tracker, and frame rendering.
#include "vdamf/benchmark.hpp"
#include "vdamf/match_engine.hpp"
#include "vdamf/scenarios.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

vdamf::Cluster synthetic_cluster(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<vdamf::ScanPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    // Rear face and right side of a 4.5 x 1.8 box at (15, 2).
    const bool rear = u(rng) < 0.4;
    const double s = u(rng);
    const double x = rear ? 12.75 : 12.75 + 4.5 * s;
    const double y = rear ? 1.1 + 1.8 * s : 1.1;
    pts.push_back({x + noise(rng), y + noise(rng), 1.0});
  }
  return vdamf::Cluster(std::move(pts), 0.15);
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
  using namespace vdamf;
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel (ms)", "serial", "parallel", "speedup");

  for (std::size_t n : {100u, 1000u, 10000u}) {
    const Cluster c = synthetic_cluster(n, n);
    const MatchState st{15.0, 2.0, 0.05, 1.8, 4.5};
    const double phi = viewing_angle(c, SensorOrigin{});
    const int reps = n >= 10000 ? 20 : 200;
    const double ts = time_ms([&] { (void)evaluate_serial(c, st, phi); }, reps);
    const double tp = time_ms([&] { (void)evaluate(c, st, phi); }, reps);
    char name[64];
    std::snprintf(name, sizeof name, "evaluate, %zu hits", n);
    row(name, ts, tp);
  }

  const Scene scene = scenarios::many_targets(50, 1);
  std::vector<Frame> frames;
  for (const RenderedFrame& rf : render_sequence(scene, 3.0)) frames.push_back(rf.frame);
  RunConfig serial_cfg;
  serial_cfg.tracker.parallel_fits = false;
  RunConfig parallel_cfg;
  const double track_s = bench_tracking(frames, serial_cfg).mean_frame_ms;
  const double track_p = bench_tracking(frames, parallel_cfg).mean_frame_ms;
  row("tracker frame, 50 targets", track_s, track_p);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double render_s = time_ms([&] { (void)render_frame(scene, 0.0, 0); }, 5);
  omp_set_num_threads(saved);
  const double render_p = time_ms([&] { (void)render_frame(scene, 0.0, 0); }, 5);
  row("render frame, 50 targets", render_s, render_p);

  const FitBenchReport fb = bench_fits(frames, parallel_cfg, 1000, 100);
  std::printf("fit + covariance, %zu hits: mean %.4f ms over %zu fits (1 thread)\n",
              fb.hits_per_cluster, fb.mean_ms, fb.fits);
  return 0;
}
