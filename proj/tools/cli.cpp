#include "cli.hpp"

#include "vdamf/benchmark.hpp"
#include "vdamf/io.hpp"
#include "vdamf/scenarios.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace vdamf::cli {

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file (see dump-config)");
  cmd->add_option("--seed", c.seed, "Random seed (default 0)");
  cmd->add_option("--out", c.out_path, "Output path (default stdout)");
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

// Writes `text` to the --out file, or to `out` when no path was given.
void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + c.out_path + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + c.out_path + "'");
}

std::vector<Frame> frames_only(const std::vector<LabeledFrame>& lf) {
  std::vector<Frame> out;
  out.reserve(lf.size());
  for (const auto& f : lf) out.push_back(f.frame);
  return out;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string scenario;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  ScenarioSpec spec = scenario_from_json(read_json_file(a.scenario));
  if (a.common.seed) spec.scene.seed = *a.common.seed;
  const auto frames = render_sequence(spec.scene, spec.duration);
  std::ostringstream lines;
  write_frames(lines, frames);
  emit(a.common, lines.str(), out);
  if (!a.common.out_path.empty()) {
    const Json summary = {{"command", "generate"},
                          {"seed", spec.scene.seed},
                          {"frames", frames.size()},
                          {"objects", spec.scene.objects.size()},
                          {"out", a.common.out_path}};
    out << summary.dump() << '\n';
  }
  (void)cfg;
  return kOk;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string frames;
  std::optional<int> frame_id;
  std::size_t cluster = 0;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  const auto frames = read_frames(a.frames);
  if (frames.empty()) throw InvalidInput("frame file is empty");
  const Frame* frame = &frames.front().frame;
  if (a.frame_id) {
    frame = nullptr;
    for (const auto& f : frames) {
      if (f.frame.frame_id == *a.frame_id) frame = &f.frame;
    }
    if (!frame) throw InvalidInput("no frame with id " + std::to_string(*a.frame_id));
  }
  const TrackerConfig& tc = cfg.tracker;
  const auto above = remove_ground(*frame, tc.ground_height, tc.scan.ground_margin);
  const auto clusters = cluster_points(above, tc.scan.cluster_gap, tc.scan.sigma);
  if (a.cluster >= clusters.size()) {
    throw InvalidInput("cluster index " + std::to_string(a.cluster) + " out of range (" +
                       std::to_string(clusters.size()) + " clusters)");
  }
  const Cluster& cl = clusters[a.cluster];
  const double phi = viewing_angle(cl, frame->sensor);
  const MatchState init = initialize_state(cl, phi, tc.optimizer.size_bounds);
  const FitResult fr = fit(cl, init, frame->sensor, tc.optimizer, tc.weights);
  const Measurement m = make_measurement(fr, tc.uncertainty);
  Json j = {{"command", "fit"},
            {"seed", cfg.seed},
            {"frame_id", frame->frame_id},
            {"cluster", a.cluster},
            {"clusters", clusters.size()},
            {"hits", cl.size()},
            {"init", to_json(init)}};
  j.update(to_json(fr, m));
  emit(a.common, j.dump(2) + "\n", out);
  return kOk;
}

// ---- track ------------------------------------------------------------------

struct TrackArgs {
  Common common;
  std::string frames;
  std::string trace_csv;
};

void write_trace_row(std::ostream& csv, const FrameResult& r, const TrackReport& t) {
  csv << r.frame_id << ',' << r.timestamp << ',' << t.id << ',' << to_string(t.status) << ','
      << t.kin[kKinX] << ',' << t.kin[kKinY] << ',' << t.kin[kKinHeading] << ','
      << t.kin[kKinSpeed] << ',' << t.kin[kKinYawRate] << ',' << t.length << ',' << t.width;
  if (t.measurement) {
    const MatchState& s = t.measurement->state;
    const VisibleEdges& v = t.measurement->visible_edges;
    csv << ',' << s.tx << ',' << s.ty << ',' << s.theta << ',' << s.l << ',' << s.w << ','
        << v.front << v.rear << v.right << v.left;
  } else {
    csv << ",,,,,,";
  }
  csv << ',' << t.cluster_points << '\n';
}

int cmd_track(const TrackArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  const auto frames = read_frames(a.frames);
  Tracker tracker(cfg.tracker);
  std::ostringstream lines;
  lines << std::setprecision(17);
  std::ofstream csv;
  if (!a.trace_csv.empty()) {
    csv.open(a.trace_csv);
    if (!csv) throw InvalidInput("cannot write '" + a.trace_csv + "'");
    csv << std::setprecision(10);
    csv << "frame_id,timestamp,id,status,x,y,heading,speed,yaw_rate,l,w,"
           "meas_tx,meas_ty,meas_theta,meas_l,meas_w,visible_frlr,hits\n";
  }
  std::set<int> ids;
  for (const auto& lf : frames) {
    const FrameResult r = tracker.step_frame(lf.frame);
    lines << to_json(r).dump() << '\n';
    for (const TrackReport& t : r.tracks) {
      ids.insert(t.id);
      if (csv.is_open()) write_trace_row(csv, r, t);
    }
  }
  emit(a.common, lines.str(), out);
  if (!a.common.out_path.empty()) {
    const Json summary = {{"command", "track"},
                          {"seed", cfg.seed},
                          {"frames", frames.size()},
                          {"tracks", ids.size()},
                          {"out", a.common.out_path}};
    out << summary.dump() << '\n';
  }
  return kOk;
}

// ---- train-clf --------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::vector<std::string> frames;
  std::size_t synthetic = 0;
};

void collect_labeled(const LabeledFrame& lf, const SampleConfig& sc, std::vector<FeatureGrid>& pos,
                     std::vector<FeatureGrid>& neg) {
  std::map<int, ObjectKind> kinds;
  for (const ObjectTruth& t : lf.truth) kinds[t.id] = t.kind;
  for (ObjectSample& s : object_samples(lf.frame, sc)) {
    const auto it = kinds.find(s.object_id);
    if (it == kinds.end()) continue;
    (it->second == ObjectKind::kVehicle ? pos : neg).push_back(std::move(s.grid));
  }
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  if (a.frames.empty() && a.synthetic == 0) {
    throw InvalidInput("train-clf needs --frames or --synthetic");
  }
  const SampleConfig sc = cfg.sample_config();
  std::vector<FeatureGrid> pos;
  std::vector<FeatureGrid> neg;
  for (const std::string& path : a.frames) {
    for (const LabeledFrame& lf : read_frames(path)) collect_labeled(lf, sc, pos, neg);
  }
  for (std::size_t i = 0; i < a.synthetic; ++i) {
    for (ObjectKind kind : {ObjectKind::kVehicle, ObjectKind::kClutter}) {
      const std::uint64_t seed = cfg.seed * 1000003ULL + 2 * i + (kind == ObjectKind::kClutter);
      const RenderedFrame rf = render_frame(scenarios::classification_scene(kind, seed), 0.0, 0);
      collect_labeled({rf.frame, rf.truth}, sc, pos, neg);
    }
  }
  const LinearClassifier clf = train(pos, neg, cfg.train);
  std::size_t correct = 0;
  for (const auto& g : pos) correct += score(g, clf) > 0.0;
  for (const auto& g : neg) correct += score(g, clf) < 0.0;
  Json j = to_json(clf);
  j["metadata"]["seed"] = cfg.seed;
  j["metadata"]["training_accuracy"] =
      static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size());
  if (a.common.out_path.empty()) {
    out << j.dump() << '\n';
  } else {
    emit(a.common, j.dump() + "\n", out);
    const Json summary = {{"command", "train-clf"},
                          {"seed", cfg.seed},
                          {"positives", pos.size()},
                          {"negatives", neg.size()},
                          {"training_accuracy", j["metadata"]["training_accuracy"]},
                          {"out", a.common.out_path}};
    out << summary.dump() << '\n';
  }
  return kOk;
}

// ---- discriminate -----------------------------------------------------------

struct DiscriminateArgs {
  Common common;
  std::string frames;
  std::string classifier;
};

int cmd_discriminate(const DiscriminateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  const LinearClassifier clf = classifier_from_json(read_json_file(a.classifier));
  if (!(clf.config == cfg.grid)) throw InvalidInput("classifier grid does not match config grid");
  const auto frames = read_frames(a.frames);
  Tracker tracker(cfg.tracker);

  struct Tally {
    std::vector<double> scores;
    Vec2 last_position = Vec2::Zero();
    std::optional<ObjectTruth> truth;
  };
  std::map<int, Tally> tally;
  for (const auto& lf : frames) {
    const FrameResult r = tracker.step_frame(lf.frame);
    for (const TrackReport& t : r.tracks) {
      if (!t.measurement || t.points.size() < cfg.min_object_hits) continue;
      const CanonicalCloud cc =
          canonicalize(t.points, t.measurement->state, lf.frame.sensor, cfg.tracker.ground_height);
      Tally& ta = tally[t.id];
      ta.scores.push_back(score(bin(cc, cfg.grid), clf));
      ta.last_position = t.measurement->state.position();
      double best = 3.0;
      for (const ObjectTruth& o : lf.truth) {
        const double d = (Vec2(o.pose.x, o.pose.y) - ta.last_position).norm();
        if (d < best) {
          best = d;
          ta.truth = o;
        }
      }
    }
  }
  Json tracks = Json::array();
  for (const auto& [id, ta] : tally) {
    double sum = 0.0;
    for (double s : ta.scores) sum += s;
    const double mean = sum / static_cast<double>(ta.scores.size());
    Json t = {{"id", id},
              {"frames_scored", ta.scores.size()},
              {"mean_score", mean},
              {"min_score", *std::min_element(ta.scores.begin(), ta.scores.end())},
              {"max_score", *std::max_element(ta.scores.begin(), ta.scores.end())},
              {"vehicle", mean > 0.0}};
    if (ta.truth) {
      t["truth_id"] = ta.truth->id;
      t["truth_kind"] = to_string(ta.truth->kind);
    }
    tracks.push_back(t);
  }
  const Json j = {{"command", "discriminate"}, {"seed", cfg.seed}, {"tracks", tracks}};
  emit(a.common, j.dump(2) + "\n", out);
  return kOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string frames;
  std::size_t fits = 1000;
  std::size_t hits = 100;
  int targets = 50;
  double duration = 10.0;
};

Json timing_json(const FrameTiming& t) {
  return {{"segment", t.segment_ms},
          {"assign", t.assign_ms},
          {"fit", t.fit_ms},
          {"update", t.update_ms},
          {"total", t.total_ms}};
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common);
  std::vector<Frame> frames;
  std::string source;
  if (a.frames.empty()) {
    const Scene scene = scenarios::many_targets(a.targets, cfg.seed);
    for (const RenderedFrame& rf : render_sequence(scene, a.duration)) frames.push_back(rf.frame);
    source = "many_targets:" + std::to_string(a.targets);
  } else {
    frames = frames_only(read_frames(a.frames));
    source = a.frames;
  }
  if (frames.empty()) throw InvalidInput("bench needs at least one frame");
  const TrackBenchReport tr = bench_tracking(frames, cfg);
  const FitBenchReport fr = bench_fits(frames, cfg, a.fits, a.hits);
  const Json j = {{"command", "bench"},
                  {"seed", cfg.seed},
                  {"source", source},
                  {"frames", tr.frames},
                  {"mean_targets_per_frame", tr.mean_targets},
                  {"mean_frame_ms", tr.mean_frame_ms},
                  {"max_frame_ms", tr.max_frame_ms},
                  {"stage_ms", timing_json(tr.mean_stage)},
                  {"fit",
                   {{"fits", fr.fits},
                    {"clusters", fr.clusters},
                    {"hits_per_cluster", fr.hits_per_cluster},
                    {"threads", fr.threads},
                    {"mean_ms", fr.mean_ms},
                    {"median_ms", fr.median_ms},
                    {"max_ms", fr.max_ms}}}};
  emit(a.common, j.dump(2) + "\n", out);
  return kOk;
}

void write_error(std::ostream& err, const char* type, const std::string& message, int code) {
  const Json j = {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle pose fitting and tracking from planar laser scans"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "Render a synthetic scenario to a frame file");
  add_common(c_gen, gen.common);
  c_gen->add_option("--scenario", gen.scenario, "Scenario JSON")->required();

  FitArgs fit_args;
  CLI::App* c_fit = app.add_subcommand("fit", "Fit one cluster of one frame");
  add_common(c_fit, fit_args.common);
  c_fit->add_option("--frames", fit_args.frames, "Frame file (JSON lines)")->required();
  c_fit->add_option("--frame-id", fit_args.frame_id, "Frame id (default: first frame)");
  c_fit->add_option("--cluster", fit_args.cluster, "Cluster index within the frame");

  TrackArgs track_args;
  CLI::App* c_track = app.add_subcommand("track", "Track every object through a frame file");
  add_common(c_track, track_args.common);
  c_track->add_option("--frames", track_args.frames, "Frame file (JSON lines)")->required();
  c_track->add_option("--trace-csv", track_args.trace_csv, "Also write a per-track CSV trace");

  TrainArgs train_args;
  CLI::App* c_train = app.add_subcommand("train-clf", "Train the vehicle/clutter classifier");
  add_common(c_train, train_args.common);
  c_train->add_option("--frames", train_args.frames, "Labeled frame files");
  c_train->add_option("--synthetic", train_args.synthetic,
                      "Also render this many synthetic vehicles and clutter objects each");

  DiscriminateArgs disc_args;
  CLI::App* c_disc = app.add_subcommand("discriminate", "Track and score objects as vehicles");
  add_common(c_disc, disc_args.common);
  c_disc->add_option("--frames", disc_args.frames, "Frame file (JSON lines)")->required();
  c_disc->add_option("--classifier", disc_args.classifier, "Classifier JSON")->required();

  BenchArgs bench_args;
  CLI::App* c_bench = app.add_subcommand("bench", "Time tracking and fitting");
  add_common(c_bench, bench_args.common);
  c_bench->add_option("--frames", bench_args.frames, "Frame file (default: synthetic scene)");
  c_bench->add_option("--fits", bench_args.fits, "Minimum number of timed fits");
  c_bench->add_option("--hits", bench_args.hits, "Hits per timed cluster");
  c_bench->add_option("--targets", bench_args.targets, "Vehicles in the synthetic scene");
  c_bench->add_option("--duration", bench_args.duration, "Seconds of synthetic data");

  Common dump_args;
  CLI::App* c_dump = app.add_subcommand("dump-config", "Print the effective configuration");
  add_common(c_dump, dump_args);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what(), kBadInput);
    return kBadInput;
  }

  try {
    if (c_gen->parsed()) return cmd_generate(gen, out);
    if (c_fit->parsed()) return cmd_fit(fit_args, out);
    if (c_track->parsed()) return cmd_track(track_args, out);
    if (c_train->parsed()) return cmd_train(train_args, out);
    if (c_disc->parsed()) return cmd_discriminate(disc_args, out);
    if (c_bench->parsed()) return cmd_bench(bench_args, out);
    if (c_dump->parsed()) {
      emit(dump_args, to_json(load_config(dump_args)).dump(2) + "\n", out);
      return kOk;
    }
  } catch (const InvalidInput& e) {
    write_error(err, "invalid_input", e.what(), kBadInput);
    return kBadInput;
  } catch (const std::exception& e) {
    write_error(err, "runtime_failure", e.what(), kRuntimeFailure);
    return kRuntimeFailure;
  }
  write_error(err, "usage", "no subcommand", kBadInput);
  return kBadInput;
}

}  // namespace vdamf::cli
