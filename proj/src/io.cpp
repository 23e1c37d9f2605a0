#include "vdamf/io.hpp"

#include "vdamf/scenarios.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace vdamf {

namespace {

template <typename T>
T convert(const Json& j, const std::string& where) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw InvalidInput(where + ": expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw InvalidInput(where + ": expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
        throw InvalidInput(where + ": expected a non-negative integer");
      }
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw InvalidInput(where + ": expected a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw InvalidInput(where + ": expected a string");
  }
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

// Reads fields of a JSON object and rejects any key that was not read.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidInput(where_ + ": expected an object");
  }

  template <typename T>
  void opt(const std::string& key, T& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    out = convert<T>(*it, path(key));
  }

  template <typename T>
  T req(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) throw InvalidInput(where_ + ": missing key '" + key + "'");
    used_.insert(key);
    return convert<T>(*it, path(key));
  }

  const Json* child(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const Json& req_child(const std::string& key) {
    const Json* c = child(key);
    if (!c) throw InvalidInput(where_ + ": missing key '" + key + "'");
    return *c;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw InvalidInput(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

const Json& require_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + ": expected an array");
  return j;
}

// ---- config -----------------------------------------------------------------

Json weights_json(const FilterWeights& w) {
  return {{"surround_weight", w.surround_weight},
          {"interior_weight", w.interior_weight},
          {"side_edge_weight", w.side_edge_weight},
          {"end_edge_weight", w.end_edge_weight},
          {"surround_length_margin", w.surround_length_margin},
          {"surround_width_margin", w.surround_width_margin},
          {"side_edge_depth", w.side_edge_depth},
          {"end_edge_depth", w.end_edge_depth},
          {"edge_epsilon", w.edge_epsilon}};
}

void read_weights(const Json& j, FilterWeights& w, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("surround_weight", w.surround_weight);
  r.opt("interior_weight", w.interior_weight);
  r.opt("side_edge_weight", w.side_edge_weight);
  r.opt("end_edge_weight", w.end_edge_weight);
  r.opt("surround_length_margin", w.surround_length_margin);
  r.opt("surround_width_margin", w.surround_width_margin);
  r.opt("side_edge_depth", w.side_edge_depth);
  r.opt("end_edge_depth", w.end_edge_depth);
  r.opt("edge_epsilon", w.edge_epsilon);
  r.finish();
}

Json optimizer_json(const OptimizerConfig& o) {
  return {{"max_iterations", o.max_iterations},
          {"max_lambda_retries", o.max_lambda_retries},
          {"lm_lambda_init", o.lm_lambda_init},
          {"lm_lambda_up", o.lm_lambda_up},
          {"lm_lambda_down", o.lm_lambda_down},
          {"position_tol", o.position_tol},
          {"angle_tol", o.angle_tol},
          {"min_pivot", o.min_pivot},
          {"w_min", o.size_bounds.w_min},
          {"w_max", o.size_bounds.w_max},
          {"l_min", o.size_bounds.l_min},
          {"l_max", o.size_bounds.l_max},
          {"normalization_derivatives", o.normalization_derivatives},
          {"enforce_length_axis", o.enforce_length_axis}};
}

void read_optimizer(const Json& j, OptimizerConfig& o, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("max_iterations", o.max_iterations);
  r.opt("max_lambda_retries", o.max_lambda_retries);
  r.opt("lm_lambda_init", o.lm_lambda_init);
  r.opt("lm_lambda_up", o.lm_lambda_up);
  r.opt("lm_lambda_down", o.lm_lambda_down);
  r.opt("position_tol", o.position_tol);
  r.opt("angle_tol", o.angle_tol);
  r.opt("min_pivot", o.min_pivot);
  r.opt("w_min", o.size_bounds.w_min);
  r.opt("w_max", o.size_bounds.w_max);
  r.opt("l_min", o.size_bounds.l_min);
  r.opt("l_max", o.size_bounds.l_max);
  r.opt("normalization_derivatives", o.normalization_derivatives);
  r.opt("enforce_length_axis", o.enforce_length_axis);
  r.finish();
}

const char* model_name(CovarianceModel m) {
  return m == CovarianceModel::kPoseBlock ? "pose_block" : "marginal";
}

Json uncertainty_json(const UncertaintyConfig& u) {
  return {{"sigma_p", u.sigma_p},
          {"model", model_name(u.model)},
          {"normalization_derivatives", u.normalization_derivatives}};
}

void read_uncertainty(const Json& j, UncertaintyConfig& u, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("sigma_p", u.sigma_p);
  std::string model = model_name(u.model);
  r.opt("model", model);
  if (model == "pose_block") {
    u.model = CovarianceModel::kPoseBlock;
  } else if (model == "marginal") {
    u.model = CovarianceModel::kMarginal;
  } else {
    throw InvalidInput(r.path("model") + ": expected 'pose_block' or 'marginal'");
  }
  r.opt("normalization_derivatives", u.normalization_derivatives);
  r.finish();
}

Json visibility_json(const VisibilityConfig& v) {
  return {{"loss_abs", v.loss_abs},
          {"loss_rel", v.loss_rel},
          {"min_history", v.min_history},
          {"history", v.history},
          {"anchor_enabled", v.anchor_enabled},
          {"mask_enabled", v.mask_enabled}};
}

void read_visibility(const Json& j, VisibilityConfig& v, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("loss_abs", v.loss_abs);
  r.opt("loss_rel", v.loss_rel);
  r.opt("min_history", v.min_history);
  r.opt("history", v.history);
  r.opt("anchor_enabled", v.anchor_enabled);
  r.opt("mask_enabled", v.mask_enabled);
  r.finish();
}

Json scan_json(const ScanConfig& s) {
  return {{"ground_margin", s.ground_margin}, {"cluster_gap", s.cluster_gap}, {"sigma", s.sigma}};
}

void read_scan(const Json& j, ScanConfig& s, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("ground_margin", s.ground_margin);
  r.opt("cluster_gap", s.cluster_gap);
  r.opt("sigma", s.sigma);
  r.finish();
}

Json tracker_json(const TrackerConfig& t) {
  return {{"ground_height", t.ground_height},
          {"gate", t.gate},
          {"confirm_hits", t.confirm_hits},
          {"miss_limit", t.miss_limit},
          {"min_cluster_points", t.min_cluster_points},
          {"accel_std", t.accel_std},
          {"yaw_accel_std", t.yaw_accel_std},
          {"init_speed_std", t.init_speed_std},
          {"init_yaw_rate_std", t.init_yaw_rate_std},
          {"reverse_speed", t.reverse_speed},
          {"meas_pos_floor", t.meas_pos_floor},
          {"meas_heading_floor", t.meas_heading_floor},
          {"parallel_fits", t.parallel_fits}};
}

void read_tracker(const Json& j, TrackerConfig& t, const std::string& where) {
  ObjectReader r(j, where);
  r.opt("ground_height", t.ground_height);
  r.opt("gate", t.gate);
  r.opt("confirm_hits", t.confirm_hits);
  r.opt("miss_limit", t.miss_limit);
  r.opt("min_cluster_points", t.min_cluster_points);
  r.opt("accel_std", t.accel_std);
  r.opt("yaw_accel_std", t.yaw_accel_std);
  r.opt("init_speed_std", t.init_speed_std);
  r.opt("init_yaw_rate_std", t.init_yaw_rate_std);
  r.opt("reverse_speed", t.reverse_speed);
  r.opt("meas_pos_floor", t.meas_pos_floor);
  r.opt("meas_heading_floor", t.meas_heading_floor);
  r.opt("parallel_fits", t.parallel_fits);
  r.finish();
}

Json grid_json(const GridConfig& g) {
  return {{"cell", g.cell}, {"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}};
}

GridConfig grid_from_json(const Json& j, const std::string& where) {
  GridConfig g;
  ObjectReader r(j, where);
  r.opt("cell", g.cell);
  r.opt("nx", g.nx);
  r.opt("ny", g.ny);
  r.opt("nz", g.nz);
  r.finish();
  g.validate();
  return g;
}

// ---- scenes -----------------------------------------------------------------

Json pose_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }

Pose2 pose_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  Pose2 p;
  p.x = r.req<double>("x");
  p.y = r.req<double>("y");
  r.opt("heading", p.heading);
  r.finish();
  return p;
}

Json trajectory_json(const Trajectory& t) {
  switch (t.kind()) {
    case Trajectory::Kind::kStatic:
      return {{"type", "static"}, {"pose", pose_json(t.at(0.0))}};
    case Trajectory::Kind::kWaypoints: {
      Json pts = Json::array();
      for (const Waypoint& w : t.points()) {
        pts.push_back({{"t", w.t}, {"x", w.pose.x}, {"y", w.pose.y}, {"heading", w.pose.heading}});
      }
      return {{"type", "waypoints"}, {"points", pts}};
    }
    case Trajectory::Kind::kCircle:
      return {{"type", "circle"},
              {"center", {t.center().x(), t.center().y()}},
              {"radius", t.radius()},
              {"speed", t.speed()},
              {"phase", t.phase()},
              {"clockwise", t.clockwise()}};
  }
  return {};
}

Trajectory trajectory_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  const auto type = r.req<std::string>("type");
  Trajectory out;
  if (type == "static") {
    out = Trajectory::fixed(pose_from_json(r.req_child("pose"), r.path("pose")));
  } else if (type == "waypoints") {
    const Json& arr = require_array(r.req_child("points"), r.path("points"));
    std::vector<Waypoint> pts;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = r.path("points") + "[" + std::to_string(i) + "]";
      ObjectReader pr(arr[i], w);
      Waypoint wp;
      wp.t = pr.req<double>("t");
      wp.pose.x = pr.req<double>("x");
      wp.pose.y = pr.req<double>("y");
      pr.opt("heading", wp.pose.heading);
      pr.finish();
      pts.push_back(wp);
    }
    out = Trajectory::waypoints(std::move(pts));
  } else if (type == "circle") {
    const Json& c = require_array(r.req_child("center"), r.path("center"));
    if (c.size() != 2) throw InvalidInput(r.path("center") + ": expected [x, y]");
    const Vec2 center(convert<double>(c[0], r.path("center")), convert<double>(c[1], r.path("center")));
    const auto radius = r.req<double>("radius");
    const auto speed = r.req<double>("speed");
    double phase = 0.0;
    bool clockwise = false;
    r.opt("phase", phase);
    r.opt("clockwise", clockwise);
    out = Trajectory::circle(center, radius, speed, phase, clockwise);
  } else {
    throw InvalidInput(r.path("type") + ": unknown trajectory type '" + type + "'");
  }
  r.finish();
  return out;
}

Json object_json(const SceneObject& o) {
  Json j = {{"id", o.id},
            {"kind", to_string(o.kind)},
            {"trajectory", trajectory_json(o.trajectory)},
            {"length", o.length},
            {"width", o.width},
            {"height", o.height},
            {"clearance", o.clearance}};
  if (!o.blobs.empty()) {
    Json blobs = Json::array();
    for (const Ellipsoid& e : o.blobs) {
      blobs.push_back({{"center", {e.center.x(), e.center.y(), e.center.z()}},
                       {"radii", {e.radii.x(), e.radii.y(), e.radii.z()}},
                       {"yaw", e.yaw}});
    }
    j["blobs"] = blobs;
  }
  return j;
}

Vec3 vec3_from_json(const Json& j, const std::string& where) {
  require_array(j, where);
  if (j.size() != 3) throw InvalidInput(where + ": expected three numbers");
  return {convert<double>(j[0], where), convert<double>(j[1], where), convert<double>(j[2], where)};
}

SceneObject object_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  SceneObject o;
  o.id = r.req<int>("id");
  std::string kind = "vehicle";
  r.opt("kind", kind);
  try {
    o.kind = object_kind_from_string(kind);
  } catch (const std::exception& e) {
    throw InvalidInput(r.path("kind") + ": " + e.what());
  }
  o.trajectory = trajectory_from_json(r.req_child("trajectory"), r.path("trajectory"));
  r.opt("length", o.length);
  r.opt("width", o.width);
  r.opt("height", o.height);
  r.opt("clearance", o.clearance);
  std::uint64_t clutter_seed = 0;
  bool has_seed = false;
  if (const Json* s = r.child("clutter_seed")) {
    clutter_seed = convert<std::uint64_t>(*s, r.path("clutter_seed"));
    has_seed = true;
  }
  if (const Json* b = r.child("blobs")) {
    require_array(*b, r.path("blobs"));
    for (std::size_t i = 0; i < b->size(); ++i) {
      const std::string w = r.path("blobs") + "[" + std::to_string(i) + "]";
      ObjectReader br((*b)[i], w);
      Ellipsoid e;
      e.center = vec3_from_json(br.req_child("center"), br.path("center"));
      e.radii = vec3_from_json(br.req_child("radii"), br.path("radii"));
      br.opt("yaw", e.yaw);
      br.finish();
      o.blobs.push_back(e);
    }
  }
  r.finish();
  if (o.kind == ObjectKind::kClutter && o.blobs.empty()) {
    if (!has_seed) throw InvalidInput(where + ": clutter needs 'blobs' or 'clutter_seed'");
    const SceneObject gen = scenarios::clutter_object(o.id, o.trajectory.at(0.0), clutter_seed);
    o.blobs = gen.blobs;
  }
  if (!(o.length > 0.0) || !(o.width > 0.0) || !(o.height > o.clearance)) {
    throw InvalidInput(where + ": object dimensions must be positive");
  }
  return o;
}

Json sensor_json(const SensorModel& s) {
  return {{"trajectory", trajectory_json(s.trajectory)},
          {"height", s.height},
          {"azimuth_fov", s.azimuth_fov},
          {"azimuth_step", s.azimuth_step},
          {"elevation_top", s.elevation_top},
          {"elevation_rows", s.elevation_rows},
          {"elevation_step", s.elevation_step},
          {"range_noise", s.range_noise},
          {"max_range", s.max_range},
          {"frame_rate", s.frame_rate}};
}

SensorModel sensor_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  SensorModel s = scenarios::default_sensor();
  if (const Json* t = r.child("trajectory")) s.trajectory = trajectory_from_json(*t, r.path("trajectory"));
  r.opt("height", s.height);
  r.opt("azimuth_fov", s.azimuth_fov);
  r.opt("azimuth_step", s.azimuth_step);
  r.opt("elevation_top", s.elevation_top);
  r.opt("elevation_rows", s.elevation_rows);
  r.opt("elevation_step", s.elevation_step);
  r.opt("range_noise", s.range_noise);
  r.opt("max_range", s.max_range);
  r.opt("frame_rate", s.frame_rate);
  r.finish();
  s.validate();
  return s;
}

ScenarioSpec preset_from_json(const Json& j) {
  ObjectReader r(j, "scenario");
  const auto name = r.req<std::string>("preset");
  std::uint64_t seed = 0;
  double noise = 0.03;
  r.opt("seed", seed);
  r.opt("range_noise", noise);
  ScenarioSpec spec;
  if (name == "single_vehicle") {
    Pose2 pose{15.0, 0.0, 0.3};
    if (const Json* p = r.child("pose")) pose = pose_from_json(*p, r.path("pose"));
    spec.duration = 1.0;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::single_vehicle(pose, seed, noise);
  } else if (name == "constant_velocity") {
    double speed = 5.0;
    noise = 0.05;
    r.opt("range_noise", noise);
    r.opt("speed", speed);
    spec.duration = 6.0;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::constant_velocity(speed, seed, noise);
  } else if (name == "circling") {
    double radius = 10.0;
    double speed = 3.0;
    r.opt("radius", radius);
    r.opt("speed", speed);
    spec.duration = 2.0 * kPi * radius / speed;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::circling(radius, speed, seed, noise);
  } else if (name == "rotating_in_place") {
    int rotate = 50;
    int before = 10;
    int after = 10;
    r.opt("rotate_frames", rotate);
    r.opt("hold_before", before);
    r.opt("hold_after", after);
    spec.duration = (rotate + before + after) / 10.0;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::rotating_in_place(rotate, before, after, seed, noise);
  } else if (name == "many_targets") {
    int count = 50;
    r.opt("count", count);
    spec.duration = 10.0;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::many_targets(count, seed, noise);
  } else if (name == "classification") {
    std::string kind = "vehicle";
    r.opt("kind", kind);
    spec.duration = 0.1;
    r.opt("duration", spec.duration);
    spec.scene = scenarios::classification_scene(object_kind_from_string(kind), seed, noise);
  } else {
    throw InvalidInput("scenario.preset: unknown preset '" + name + "'");
  }
  r.finish();
  if (!(spec.duration > 0.0)) throw InvalidInput("scenario.duration must be positive");
  return spec;
}

// ---- frames -----------------------------------------------------------------

Json truth_json(const ObjectTruth& t) {
  return {{"id", t.id},
          {"kind", to_string(t.kind)},
          {"x", t.pose.x},
          {"y", t.pose.y},
          {"heading", t.pose.heading},
          {"length", t.length},
          {"width", t.width},
          {"height", t.height},
          {"beta", t.beta},
          {"visible", {t.front_visible, t.rear_visible, t.right_visible, t.left_visible}}};
}

ObjectTruth truth_from_json(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  ObjectTruth t;
  t.id = r.req<int>("id");
  t.kind = object_kind_from_string(r.req<std::string>("kind"));
  t.pose.x = r.req<double>("x");
  t.pose.y = r.req<double>("y");
  t.pose.heading = r.req<double>("heading");
  r.opt("length", t.length);
  r.opt("width", t.width);
  r.opt("height", t.height);
  r.opt("beta", t.beta);
  if (const Json* v = r.child("visible")) {
    require_array(*v, r.path("visible"));
    if (v->size() != 4) throw InvalidInput(r.path("visible") + ": expected four booleans");
    t.front_visible = convert<bool>((*v)[0], r.path("visible"));
    t.rear_visible = convert<bool>((*v)[1], r.path("visible"));
    t.right_visible = convert<bool>((*v)[2], r.path("visible"));
    t.left_visible = convert<bool>((*v)[3], r.path("visible"));
  }
  r.finish();
  return t;
}

}  // namespace

// ---- public -----------------------------------------------------------------

void RunConfig::validate() const {
  tracker.validate();
  grid.validate();
  train.validate();
}

SampleConfig RunConfig::sample_config() const {
  SampleConfig s;
  s.ground_height = tracker.ground_height;
  s.ground_margin = tracker.scan.ground_margin;
  s.sigma = tracker.scan.sigma;
  s.min_hits = min_object_hits;
  s.optimizer = tracker.optimizer;
  s.optimizer.enforce_length_axis = true;
  s.grid = grid;
  return s;
}

Json to_json(const RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"tracker", tracker_json(cfg.tracker)},
          {"scan", scan_json(cfg.tracker.scan)},
          {"weights", weights_json(cfg.tracker.weights)},
          {"optimizer", optimizer_json(cfg.tracker.optimizer)},
          {"uncertainty", uncertainty_json(cfg.tracker.uncertainty)},
          {"visibility", visibility_json(cfg.tracker.visibility)},
          {"grid", grid_json(cfg.grid)},
          {"train", {{"reg", cfg.train.reg}, {"iterations", cfg.train.iterations}}},
          {"min_object_hits", cfg.min_object_hits}};
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  ObjectReader r(j, "config");
  r.opt("seed", cfg.seed);
  if (const Json* c = r.child("tracker")) read_tracker(*c, cfg.tracker, "config.tracker");
  if (const Json* c = r.child("scan")) read_scan(*c, cfg.tracker.scan, "config.scan");
  if (const Json* c = r.child("weights")) read_weights(*c, cfg.tracker.weights, "config.weights");
  if (const Json* c = r.child("optimizer")) {
    read_optimizer(*c, cfg.tracker.optimizer, "config.optimizer");
  }
  if (const Json* c = r.child("uncertainty")) {
    read_uncertainty(*c, cfg.tracker.uncertainty, "config.uncertainty");
  }
  if (const Json* c = r.child("visibility")) {
    read_visibility(*c, cfg.tracker.visibility, "config.visibility");
  }
  if (const Json* c = r.child("grid")) cfg.grid = grid_from_json(*c, "config.grid");
  if (const Json* c = r.child("train")) {
    ObjectReader tr(*c, "config.train");
    tr.opt("reg", cfg.train.reg);
    tr.opt("iterations", cfg.train.iterations);
    tr.finish();
  }
  r.opt("min_object_hits", cfg.min_object_hits);
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_json_file(path)); }

ScenarioSpec scenario_from_json(const Json& j) {
  if (j.is_object() && j.contains("preset")) return preset_from_json(j);
  ObjectReader r(j, "scenario");
  ScenarioSpec spec;
  spec.duration = r.req<double>("duration");
  r.opt("seed", spec.scene.seed);
  spec.scene.sensor = scenarios::default_sensor();
  if (const Json* s = r.child("sensor")) spec.scene.sensor = sensor_from_json(*s, "scenario.sensor");
  const Json& objs = require_array(r.req_child("objects"), "scenario.objects");
  std::set<int> ids;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    SceneObject o = object_from_json(objs[i], "scenario.objects[" + std::to_string(i) + "]");
    if (o.id < 0 || !ids.insert(o.id).second) {
      throw InvalidInput("scenario.objects: ids must be unique and non-negative");
    }
    spec.scene.objects.push_back(std::move(o));
  }
  r.finish();
  if (!(spec.duration > 0.0)) throw InvalidInput("scenario.duration must be positive");
  return spec;
}

Json to_json(const ScenarioSpec& spec) {
  Json objs = Json::array();
  for (const SceneObject& o : spec.scene.objects) objs.push_back(object_json(o));
  return {{"duration", spec.duration},
          {"seed", spec.scene.seed},
          {"sensor", sensor_json(spec.scene.sensor)},
          {"objects", objs}};
}

Json to_json(const Frame& frame, const std::vector<ObjectTruth>& truth) {
  Json pts = Json::array();
  for (const ScanPoint& p : frame.points) pts.push_back({p.x, p.y, p.z});
  Json j = {{"frame_id", frame.frame_id},
            {"timestamp", frame.timestamp},
            {"sensor", {frame.sensor.x, frame.sensor.y, frame.sensor.z}},
            {"points", pts}};
  if (!frame.labels.empty()) j["labels"] = frame.labels;
  if (!truth.empty()) {
    Json t = Json::array();
    for (const ObjectTruth& o : truth) t.push_back(truth_json(o));
    j["truth"] = t;
  }
  return j;
}

LabeledFrame frame_from_json(const Json& j) {
  ObjectReader r(j, "frame");
  LabeledFrame out;
  Frame& f = out.frame;
  f.frame_id = r.req<int>("frame_id");
  f.timestamp = r.req<double>("timestamp");
  if (!std::isfinite(f.timestamp)) throw InvalidInput("frame.timestamp must be finite");
  if (const Json* s = r.child("sensor")) {
    const Vec3 v = vec3_from_json(*s, "frame.sensor");
    f.sensor = {v.x(), v.y(), v.z()};
  }
  const Json& pts = require_array(r.req_child("points"), "frame.points");
  f.points.reserve(pts.size());
  for (const Json& p : pts) {
    const Vec3 v = vec3_from_json(p, "frame.points[]");
    if (!v.allFinite()) throw InvalidInput("frame.points: non-finite coordinate");
    f.points.push_back({v.x(), v.y(), v.z(), f.frame_id});
  }
  if (const Json* l = r.child("labels")) {
    require_array(*l, "frame.labels");
    for (const Json& v : *l) f.labels.push_back(convert<int>(v, "frame.labels[]"));
    if (f.labels.size() != f.points.size()) {
      throw InvalidInput("frame.labels: must have one label per point");
    }
  }
  if (const Json* t = r.child("truth")) {
    require_array(*t, "frame.truth");
    for (const Json& o : *t) out.truth.push_back(truth_from_json(o, "frame.truth[]"));
  }
  r.finish();
  return out;
}

void write_frames(std::ostream& os, const std::vector<RenderedFrame>& frames) {
  for (const RenderedFrame& rf : frames) os << to_json(rf.frame, rf.truth).dump() << '\n';
}

std::vector<LabeledFrame> read_frames(std::istream& is) {
  std::vector<LabeledFrame> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput("frame line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(frame_from_json(j));
  }
  return out;
}

std::vector<LabeledFrame> read_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open frame file '" + path + "'");
  return read_frames(in);
}

Json to_json(const LinearClassifier& clf) {
  std::vector<double> w(clf.weights.data(), clf.weights.data() + clf.weights.size());
  return {{"grid_config", grid_json(clf.config)},
          {"weights", w},
          {"bias", clf.bias},
          {"metadata",
           {{"reg", clf.reg},
            {"iterations", clf.iterations},
            {"objective", clf.objective},
            {"positives", clf.positives},
            {"negatives", clf.negatives}}}};
}

LinearClassifier classifier_from_json(const Json& j) {
  ObjectReader r(j, "classifier");
  LinearClassifier clf;
  clf.config = grid_from_json(r.req_child("grid_config"), "classifier.grid_config");
  const Json& w = require_array(r.req_child("weights"), "classifier.weights");
  if (static_cast<int>(w.size()) != clf.config.size()) {
    throw InvalidInput("classifier.weights: length does not match grid_config");
  }
  clf.weights.resize(clf.config.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    clf.weights[static_cast<Eigen::Index>(i)] = convert<double>(w[i], "classifier.weights[]");
  }
  clf.bias = r.req<double>("bias");
  if (!clf.weights.allFinite() || !std::isfinite(clf.bias)) {
    throw InvalidInput("classifier: weights must be finite");
  }
  if (const Json* m = r.child("metadata")) {
    ObjectReader mr(*m, "classifier.metadata");
    mr.opt("reg", clf.reg);
    mr.opt("iterations", clf.iterations);
    mr.opt("objective", clf.objective);
    mr.opt("positives", clf.positives);
    mr.opt("negatives", clf.negatives);
    // Metadata is descriptive; tools may add their own keys (seed, accuracy).
  }
  r.finish();
  return clf;
}

Json to_json(const MatchState& s) {
  return {{"tx", s.tx}, {"ty", s.ty}, {"theta", s.theta}, {"w", s.w}, {"l", s.l}};
}

Json to_json(const FitResult& fit, const Measurement& meas) {
  Json cov = Json::array();
  for (int i = 0; i < 3; ++i) cov.push_back({meas.pose_cov(i, 0), meas.pose_cov(i, 1), meas.pose_cov(i, 2)});
  return {{"state", to_json(fit.state)},
          {"score", fit.score},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"phi", fit.phi},
          {"pose_cov", cov},
          {"covariance_fallback", meas.fallback},
          {"score_history", fit.score_history}};
}

Json to_json(const FrameResult& result) {
  Json tracks = Json::array();
  for (const TrackReport& t : result.tracks) {
    std::vector<double> cd(t.cov_diag.data(), t.cov_diag.data() + 5);
    tracks.push_back({{"id", t.id},
                      {"x", t.kin[kKinX]},
                      {"y", t.kin[kKinY]},
                      {"heading", t.kin[kKinHeading]},
                      {"speed", t.kin[kKinSpeed]},
                      {"yaw_rate", t.kin[kKinYawRate]},
                      {"l", t.length},
                      {"w", t.width},
                      {"status", to_string(t.status)},
                      {"cov_diag", cd}});
  }
  return {{"frame_id", result.frame_id}, {"timestamp", result.timestamp}, {"tracks", tracks}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

}  // namespace vdamf
