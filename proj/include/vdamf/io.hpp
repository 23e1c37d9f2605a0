#pragma once

#include "vdamf/discriminator.hpp"
#include "vdamf/synthesizer.hpp"
#include "vdamf/tracker.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vdamf {

using Json = nlohmann::ordered_json;

/// Every tunable value of the pipeline. Unknown keys are rejected on load;
/// missing keys keep their defaults.
struct RunConfig {
  std::uint64_t seed = 0;
  TrackerConfig tracker;
  GridConfig grid;
  TrainConfig train;
  std::size_t min_object_hits = 10;

  void validate() const;
  /// Settings for per-object feature extraction, derived from the above.
  SampleConfig sample_config() const;
};

Json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::string& path);

/// A scene plus how long to render it.
struct ScenarioSpec {
  Scene scene;
  double duration = 1.0;
};

/// Either a full description ({"duration", "seed", "sensor", "objects"}) or a
/// named preset ({"preset": name, ...parameters}).
ScenarioSpec scenario_from_json(const Json& j);
Json to_json(const ScenarioSpec& spec);

/// A frame with optional ground truth, as stored one per line in frame files.
struct LabeledFrame {
  Frame frame;
  std::vector<ObjectTruth> truth;
};

Json to_json(const Frame& frame, const std::vector<ObjectTruth>& truth = {});
LabeledFrame frame_from_json(const Json& j);

void write_frames(std::ostream& os, const std::vector<RenderedFrame>& frames);
std::vector<LabeledFrame> read_frames(std::istream& is);
std::vector<LabeledFrame> read_frames(const std::string& path);

Json to_json(const LinearClassifier& clf);
LinearClassifier classifier_from_json(const Json& j);

Json to_json(const MatchState& s);
Json to_json(const FitResult& fit, const Measurement& meas);
Json to_json(const FrameResult& result);

/// Parses a whole file as JSON; InvalidInput on missing files or bad syntax.
Json read_json_file(const std::string& path);

}  // namespace vdamf
