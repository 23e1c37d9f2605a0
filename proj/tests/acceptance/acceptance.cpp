// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "support/oracles.hpp"
#include "support/random_configs.hpp"
#include "support/scenes.hpp"
#include "vdamf/benchmark.hpp"
#include "vdamf/discriminator.hpp"
#include "vdamf/io.hpp"
#include "vdamf/match_engine.hpp"
#include "vdamf/pose_optimizer.hpp"
#include "vdamf/scenarios.hpp"
#include "vdamf/tracker.hpp"
#include "vdamf/uncertainty.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vdamf {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(k, v.size() - 1)];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Criterion 1: closed-form response against brute-force quadrature.
Outcome analytic_vs_quadrature() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto cfg = testing::random_config(rng, 3, 8);
    const MatchEval ev = evaluate(cfg.cluster, cfg.state, cfg.phi);
    const double q =
        oracle::response_quadrature(cfg.cluster.planar_means(), cfg.cluster.sigma(), cfg.state, ev.filter);
    worst = std::max(worst, std::abs(ev.value - q) / std::abs(q));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 60.0, fmt("100 configs, max rel err %.2e (tol 1e-5), %.1f s (limit 60 s)", worst, t)};
}

// Criterion 2: alpha- and phi-frozen derivatives against central differences.
Outcome derivative_suite() {
  constexpr double h = 1e-5;
  std::mt19937_64 rng(2002);
  int checked = 0;
  int bad = 0;
  auto check = [&](double analytic, double numeric) {
    ++checked;
    if (!oracle::close(analytic, numeric, 1e-4, 1e-8)) ++bad;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = testing::random_config(rng);
    const MatchEval ev = evaluate(cfg.cluster, cfg.state, cfg.phi);
    const Vec5 x = cfg.state.as_vector();
    const auto means = cfg.cluster.planar_means();
    auto frozen = [&](const Vec5& v) {
      const MatchState st = MatchState::from_vector(v);
      return evaluate_value_with_alpha(means, cfg.cluster.sigma(), st, build_filter(st, cfg.phi), ev.alpha);
    };
    const Vec5 g = oracle::fd_gradient(frozen, x, h);
    for (int k = 0; k < 5; ++k) check(ev.grad[k], g[k]);
    for (int k = 0; k < 5; ++k) {
      auto gk = [&](const Vec5& v) {
        const MatchEval e = evaluate(cfg.cluster, MatchState::from_vector(v), cfg.phi);
        return e.grad[k] / e.alpha * ev.alpha;
      };
      const Vec5 hk = oracle::fd_gradient(gk, x, h);
      for (int j = 0; j < 5; ++j) check(ev.hess(k, j), hk[j]);
    }
    for (std::size_t i = 0; i < cfg.cluster.size(); ++i) {
      for (int axis = 0; axis < 2; ++axis) {
        auto moved = [&](double delta) {
          auto pts = cfg.cluster.points();
          (axis == 0 ? pts[i].x : pts[i].y) += delta;
          const MatchEval e = evaluate(Cluster(pts, cfg.cluster.sigma()), cfg.state, cfg.phi);
          return Vec3(e.grad_t());
        };
        const Vec3 fd = (moved(h) - moved(-h)) / (2 * h);
        for (int r = 0; r < 3; ++r) check(ev.point_partials[i](r, axis), fd[r]);
      }
    }
  }
  return {bad == 0, fmt("50 configs, %d of %d entries outside max(1e-4 rel, 1e-8 abs)", bad, checked)};
}

// Criterion 3: unit energy, and invariance of value, fitted pose and R_t to
// a common scale of the region heights.
Outcome normalization() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> ang(-kPi, kPi), wl(0.8, 3.5), ll(1.0, 12.0);
  double energy_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const FilterSpec f = build_filter({0, 0, ang(rng), wl(rng), ll(rng)}, ang(rng));
    energy_err = std::max(energy_err, std::abs(oracle::normalized_energy_grid(f, 3) - 1.0));
  }
  double value_err = 0.0;
  double pose_err = 0.0;
  double cov_err = 0.0;
  for (const auto& v : testing::road_views(10, 3003, 0.05, 100)) {
    const double phi = viewing_angle(v.cluster, v.sensor);
    const MatchState init = initialize_state(v.cluster, phi);
    const FitResult base = fit(v.cluster, init, v.sensor);
    const Measurement mb = make_measurement(base);
    for (double k : {0.1, 10.0}) {
      const FilterWeights wk = FilterWeights{}.scaled(k);
      const MatchEval e = evaluate(v.cluster, init, phi, wk);
      const MatchEval e0 = evaluate(v.cluster, init, phi);
      value_err = std::max(value_err, std::abs(e.value - e0.value) / std::max(std::abs(e0.value), 1e-300));
      const FitResult fk = fit(v.cluster, init, v.sensor, OptimizerConfig{}, wk);
      pose_err = std::max(pose_err, (fk.state.as_vector() - base.state.as_vector()).cwiseAbs().maxCoeff());
      const Measurement mk = make_measurement(fk);
      cov_err = std::max(cov_err, (mk.pose_cov - mb.pose_cov).norm() / mb.pose_cov.norm());
    }
  }
  const bool pass = energy_err <= 1e-6 && value_err <= 1e-8 && pose_err <= 1e-8 && cov_err <= 1e-8;
  return {pass, fmt("energy err %.1e (tol 1e-6); k in {0.1,10}: value %.1e, pose %.1e, R_t %.1e (tol 1e-8)",
                    energy_err, value_err, pose_err, cov_err)};
}

struct RoadFit {
  FitResult fit;
  ObjectTruth truth;
};

const std::vector<RoadFit>& road_fits() {
  static const std::vector<RoadFit> fits = [] {
    std::vector<RoadFit> out;
    for (const auto& v : testing::road_views(100, 4004, 0.05, 100)) {
      const MatchState init = initialize_state(v.cluster, viewing_angle(v.cluster, v.sensor));
      out.push_back({fit(v.cluster, init, v.sensor), v.truth});
    }
    return out;
  }();
  return fits;
}

// Criterion 4: LM iteration counts.
Outcome convergence_count() {
  std::vector<double> iters;
  int unconverged = 0;
  for (const auto& rf : road_fits()) {
    iters.push_back(rf.fit.iterations);
    unconverged += !rf.fit.converged;
  }
  const double med = median(iters);
  const double p95 = quantile(iters, 0.95);
  return {med >= 3 && med <= 12 && p95 <= 20,
          fmt("100 clusters (100 hits, 12-30 m, noise 0.05 m): median %.1f (want 3-12), p95 %.0f (want <= 20), "
              "%d unconverged",
              med, p95, unconverged)};
}

// Criterion 5: fitted pose against ground truth.
Outcome pose_accuracy() {
  int good = 0;
  std::vector<double> pos_err;
  for (const auto& rf : road_fits()) {
    const double dp = std::hypot(rf.fit.state.tx - rf.truth.pose.x, rf.fit.state.ty - rf.truth.pose.y);
    const double dth = std::abs(std::remainder(rf.fit.state.theta - rf.truth.pose.heading, kPi));
    pos_err.push_back(dp);
    good += dp <= 0.2 && dth <= deg2rad(5.0);
  }
  return {good >= 90, fmt("%d of 100 within 0.2 m and 5 deg (want >= 90); median position error %.2f m", good,
                          median(pos_err))};
}

// Criterion 6: first-order covariance against Monte-Carlo refits.
Outcome covariance_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const double bearings[5] = {0.0, 0.3, -0.5, 0.2, -0.2};
  const double betas[5] = {-135, -60, 45, 120, 90};
  const double ranges[5] = {10, 15, 20, 12, 18};
  const UncertaintyConfig uc;
  double lo = 1e300;
  double hi = 0.0;
  for (int g = 0; g < 5; ++g) {
    const double heading = wrap_angle(deg2rad(betas[g]) + bearings[g] + kPi);
    const Pose2 pose{ranges[g] * std::cos(bearings[g]), ranges[g] * std::sin(bearings[g]), heading};
    Scene scene = scenarios::single_vehicle(pose, 100 + g, 0.0);
    const RenderedFrame rf = render_frame(scene, 0.0, 0);
    const auto pts = remove_ground(rf.frame, 0.0, 0.3);
    const Cluster c(pts, 0.15);
    MatchState init = initialize_state(c, viewing_angle(c, rf.frame.sensor));
    init.theta = heading;
    const FitResult f0 = fit(c, init, rf.frame.sensor);
    const Mat3 r = make_measurement(f0, uc).pose_cov;

    std::mt19937_64 rng(7000 + g);
    std::normal_distribution<double> nd(0.0, uc.sigma_p);
    std::vector<Vec3> samples;
    for (int t = 0; t < 500; ++t) {
      auto q = pts;
      for (auto& p : q) {
        p.x += nd(rng);
        p.y += nd(rng);
      }
      const FitResult f = fit(Cluster(q, 0.15), f0.state, rf.frame.sensor);
      samples.emplace_back(f.state.tx, f.state.ty, f0.state.theta + wrap_angle(f.state.theta - f0.state.theta));
    }
    Vec3 mean = Vec3::Zero();
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& s : samples) cov += (s - mean) * (s - mean).transpose();
    cov /= static_cast<double>(samples.size() - 1);
    for (int k = 0; k < 3; ++k) {
      lo = std::min(lo, r(k, k) / cov(k, k));
      hi = std::max(hi, r(k, k) / cov(k, k));
    }
  }
  const double t = seconds_since(t0);
  return {lo >= 0.5 && hi <= 2.0 && t < 600.0,
          fmt("5 geometries x 500 trials: R_t/MC diagonal ratio in [%.2f, %.2f] (want [0.5, 2]), %.1f s", lo, hi, t)};
}

double peak_speed(const Scene& scene, int frames, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  double peak = 0.0;
  for (int k = 0; k < frames; ++k) {
    const FrameResult r = tracker.step_frame(render_frame(scene, k / scene.sensor.frame_rate, k).frame);
    for (const TrackReport& t : r.tracks) peak = std::max(peak, std::abs(t.kin[kKinSpeed]));
  }
  return peak;
}

// Criterion 7: a stationary car turning from side view to rear view.
Outcome phantom_velocity() {
  const Scene scene = scenarios::rotating_in_place(50, 10, 10, 4);
  TrackerConfig on;
  TrackerConfig off;
  off.visibility.anchor_enabled = false;
  off.visibility.mask_enabled = false;
  const double with = peak_speed(scene, 70, on);
  const double without = peak_speed(scene, 70, off);
  return {with < 0.5 && without > 1.5,
          fmt("peak tracked speed %.2f m/s corrected (want < 0.5), %.2f m/s uncorrected (want > 1.5)", with, without)};
}

// Criterion 8: measured length follows the visible portion of a circling car.
Outcome circling_length() {
  const Scene scene = scenarios::circling(10.0, 3.0, 8);
  const double true_l = scene.objects[0].length;
  Tracker tracker;
  // Contiguous windows within 5 degrees of an end-on or a broadside view.
  struct Window {
    bool end_on;
    double extreme;
  };
  std::vector<Window> windows;
  int prev = 0;  // 1 end-on, 2 broadside, 0 neither
  for (int k = 0; k < 250; ++k) {
    const RenderedFrame rf = render_frame(scene, k / 10.0, k);
    const FrameResult r = tracker.step_frame(rf.frame);
    const double beta = rf.truth[0].beta;
    int kind = 0;
    if (std::abs(std::sin(beta)) <= std::sin(deg2rad(5.0))) kind = 1;
    if (std::abs(std::cos(beta)) <= std::sin(deg2rad(5.0))) kind = 2;
    if (kind == 0 || k < 10 || r.tracks.size() != 1 || !r.tracks[0].measurement) {
      prev = 0;
      continue;
    }
    const double l = r.tracks[0].measurement->state.l;
    if (kind != prev) windows.push_back({kind == 1, l});
    Window& w = windows.back();
    // Track the worst frame of each window: the largest l when end-on, the smallest when broadside.
    w.extreme = w.end_on ? std::max(w.extreme, l) : std::min(w.extreme, l);
    prev = kind;
  }
  int ends = 0, sides = 0, ends_ok = 0, sides_ok = 0;
  double worst_end = 0.0, worst_side = 1e9;
  for (const Window& w : windows) {
    if (w.end_on) {
      ++ends;
      ends_ok += w.extreme < 0.6 * true_l;
      worst_end = std::max(worst_end, w.extreme / true_l);
    } else {
      ++sides;
      sides_ok += w.extreme > 0.9 * true_l;
      worst_side = std::min(worst_side, w.extreme / true_l);
    }
  }
  const bool pass = ends >= 2 && sides >= 2 && ends_ok == ends && sides_ok == sides;
  return {pass, fmt("%d end-on windows, max l/true %.2f (want < 0.6); %d broadside windows, min l/true %.2f "
                    "(want > 0.9)",
                    ends, worst_end, sides, worst_side)};
}

// Criterion 9: fit plus covariance time on 100-hit clusters, one thread.
Outcome throughput() {
  RunConfig cfg;
  std::vector<Frame> frames;
  for (const RenderedFrame& rf : render_sequence(scenarios::many_targets(50, 9), 1.0)) frames.push_back(rf.frame);
  const FitBenchReport r = bench_fits(frames, cfg, 1000, 100, true);
  return {r.fits >= 1000 && r.mean_ms <= 2.0,
          fmt("%zu fits on %zu clusters of %zu hits, %d thread: mean %.3f ms (want <= 2), median %.3f ms", r.fits,
              r.clusters, r.hits_per_cluster, r.threads, r.mean_ms, r.median_ms)};
}

Frame mirrored(const Frame& f) {
  Frame out = f;
  for (ScanPoint& p : out.points) p.y = -p.y;
  out.sensor.y = -out.sensor.y;
  return out;
}

// Criterion 10: held-out discrimination and mirror symmetry.
Outcome discriminator() {
  auto collect = [](ObjectKind kind, std::uint64_t first, std::size_t count, std::vector<FeatureGrid>* grids,
                    std::vector<Frame>* frames) {
    for (std::uint64_t seed = first; grids->size() < count; ++seed) {
      const Frame f = render_frame(scenarios::classification_scene(kind, seed), 0.0, 0).frame;
      for (ObjectSample& s : object_samples(f)) {
        grids->push_back(std::move(s.grid));
        if (frames) frames->push_back(f);
      }
    }
  };
  std::vector<FeatureGrid> train_pos, train_neg, test_pos, test_neg;
  std::vector<Frame> test_frames;
  collect(ObjectKind::kVehicle, 0, 300, &train_pos, nullptr);
  collect(ObjectKind::kClutter, 0, 300, &train_neg, nullptr);
  collect(ObjectKind::kVehicle, 1'000'000, 500, &test_pos, &test_frames);
  collect(ObjectKind::kClutter, 1'000'000, 500, &test_neg, &test_frames);
  const LinearClassifier clf = train(train_pos, train_neg);
  std::vector<double> sp, sn;
  for (const auto& g : test_pos) sp.push_back(score(g, clf));
  for (const auto& g : test_neg) sn.push_back(score(g, clf));
  const double auc = roc_auc(sp, sn);

  double mirror_diff = 0.0;
  for (const Frame& f : test_frames) {
    const auto a = object_samples(f);
    const auto b = object_samples(mirrored(f));
    if (a.size() != b.size()) return {false, "mirrored frame produced a different number of objects"};
    for (std::size_t i = 0; i < a.size(); ++i) {
      mirror_diff = std::max(mirror_diff, std::abs(score(a[i].grid, clf) - score(b[i].grid, clf)));
    }
  }
  return {auc >= 0.95 && mirror_diff <= 1e-9,
          fmt("held-out %zu vehicles / %zu clutter: AUC %.4f (want >= 0.95); mirror score diff %.1e (tol 1e-9)",
              sp.size(), sn.size(), auc, mirror_diff)};
}

// Criterion 11: two tracking runs over the same recorded file.
Outcome determinism() {
  const auto path = std::filesystem::temp_directory_path() / "vdamf_acceptance_recording.jsonl";
  {
    std::ofstream f(path);
    write_frames(f, render_sequence(scenarios::many_targets(50, 11), 3.0));
  }
  auto run_once = [&] {
    Tracker tracker;
    std::ostringstream out;
    for (const LabeledFrame& lf : read_frames(path.string())) out << to_json(tracker.step_frame(lf.frame)).dump() << '\n';
    return out.str();
  };
  const std::string a = run_once();
  const std::string b = run_once();
  std::filesystem::remove(path);
  return {a == b && !a.empty(), fmt("two runs over 30 recorded frames: %zu bytes of output, %s", a.size(),
                                    a == b ? "identical" : "different")};
}

}  // namespace
}  // namespace vdamf

int main() {
  using vdamf::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"C1 analytic response vs quadrature", vdamf::analytic_vs_quadrature},
      {"C2 derivatives vs finite differences", vdamf::derivative_suite},
      {"C3 normalization and height scaling", vdamf::normalization},
      {"C4 LM iteration count", vdamf::convergence_count},
      {"C5 pose accuracy", vdamf::pose_accuracy},
      {"C6 covariance vs Monte Carlo", vdamf::covariance_calibration},
      {"C7 phantom velocity suppression", vdamf::phantom_velocity},
      {"C8 circling length adaptation", vdamf::circling_length},
      {"C9 fit throughput", vdamf::throughput},
      {"C10 discriminator", vdamf::discriminator},
      {"C11 determinism", vdamf::determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
