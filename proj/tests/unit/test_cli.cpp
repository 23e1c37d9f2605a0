#include "cli.hpp"

#include "vdamf/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace vdamf {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("vdamf_cli_" + std::string(::testing::UnitTest::GetInstance()
                                                                         ->current_test_info()
                                                                         ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string scenario(const std::string& preset, double duration) const {
    return write(preset + ".json", Json{{"preset", preset}, {"duration", duration}, {"seed", 4}}.dump());
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, GenerateIsReproducibleForAFixedSeed) {
  const std::string sc = scenario("constant_velocity", 1.0);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--seed", "11", "--out", path("a.jsonl")}), 0) << err_.str();
  ASSERT_EQ(run({"generate", "--scenario", sc, "--seed", "11", "--out", path("b.jsonl")}), 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  const Json summary = Json::parse(out_.str());
  EXPECT_EQ(summary["seed"], 11);
  EXPECT_EQ(summary["frames"], 10);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--seed", "12", "--out", path("c.jsonl")}), 0);
  EXPECT_NE(slurp(path("a.jsonl")), slurp(path("c.jsonl")));
}

TEST_F(CliTest, FitConvergesOnASyntheticFrame) {
  const std::string sc = scenario("single_vehicle", 0.1);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--out", path("f.jsonl")}), 0);
  ASSERT_EQ(run({"fit", "--frames", path("f.jsonl")}), 0) << err_.str();
  const Json j = Json::parse(out_.str());
  EXPECT_EQ(j["command"], "fit");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_GT(j["hits"].get<int>(), 10);
  EXPECT_EQ(j["state"].size(), 5u);
  EXPECT_EQ(run({"fit", "--frames", path("f.jsonl"), "--cluster", "99"}), 2);
  EXPECT_EQ(Json::parse(err_.str())["error"]["exit_code"], 2);
}

TEST_F(CliTest, TrackWritesOneLinePerFrameAndACsvTrace) {
  const std::string sc = scenario("constant_velocity", 1.0);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--out", path("f.jsonl")}), 0);
  ASSERT_EQ(run({"track", "--frames", path("f.jsonl"), "--out", path("t.jsonl"), "--trace-csv", path("t.csv")}), 0)
      << err_.str();
  std::istringstream lines(slurp(path("t.jsonl")));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    EXPECT_EQ(j["frame_id"], n);
    ++n;
  }
  EXPECT_EQ(n, 10);
  EXPECT_EQ(Json::parse(out_.str())["tracks"], 1);
  EXPECT_NE(slurp(path("t.csv")).find("frame_id,timestamp,id"), std::string::npos);
}

TEST_F(CliTest, DumpConfigRoundTripsAndReproducesOutput) {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.tracker.gate = 2.5;
  const std::string c1 = write("c1.json", to_json(cfg).dump());
  ASSERT_EQ(run({"dump-config", "--config", c1}), 0);
  const std::string dumped = out_.str();
  const std::string c2 = write("c2.json", dumped);
  ASSERT_EQ(run({"dump-config", "--config", c2}), 0);
  EXPECT_EQ(out_.str(), dumped);

  const std::string sc = scenario("circling", 1.0);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--out", path("f.jsonl")}), 0);
  ASSERT_EQ(run({"track", "--config", c1, "--frames", path("f.jsonl"), "--out", path("t1.jsonl")}), 0);
  ASSERT_EQ(run({"track", "--config", c2, "--frames", path("f.jsonl"), "--out", path("t2.jsonl")}), 0);
  EXPECT_EQ(slurp(path("t1.jsonl")), slurp(path("t2.jsonl")));
}

TEST_F(CliTest, BadInputExitsWithTwoAndAJsonError) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(Json::parse(err_.str())["error"]["type"], "usage");
  EXPECT_EQ(run({"fit"}), 2);
  EXPECT_EQ(run({"fit", "--frames", path("missing.jsonl")}), 2);
  EXPECT_EQ(Json::parse(err_.str())["error"]["exit_code"], 2);
  const std::string bad = write("bad.json", R"({"tracker": {"gait": 1}})");
  EXPECT_EQ(run({"dump-config", "--config", bad}), 2);
  EXPECT_NE(Json::parse(err_.str())["error"]["message"].get<std::string>().find("gait"), std::string::npos);
  EXPECT_EQ(run({"train-clf"}), 2);
}

TEST_F(CliTest, TrainAndDiscriminate) {
  ASSERT_EQ(run({"train-clf", "--synthetic", "20", "--out", path("clf.json")}), 0) << err_.str();
  const Json summary = Json::parse(out_.str());
  EXPECT_EQ(summary["positives"], 20);
  EXPECT_EQ(summary["negatives"], 20);
  EXPECT_NO_THROW(classifier_from_json(read_json_file(path("clf.json"))));
  const std::string sc = scenario("single_vehicle", 0.5);
  ASSERT_EQ(run({"generate", "--scenario", sc, "--out", path("f.jsonl")}), 0);
  ASSERT_EQ(run({"discriminate", "--frames", path("f.jsonl"), "--classifier", path("clf.json")}), 0) << err_.str();
  const Json j = Json::parse(out_.str());
  ASSERT_EQ(j["tracks"].size(), 1u);
  EXPECT_EQ(j["tracks"][0]["frames_scored"], 5);
}

TEST_F(CliTest, BenchReportsPerFrameTime) {
  ASSERT_EQ(run({"bench", "--targets", "3", "--duration", "0.5", "--fits", "20", "--hits", "50"}), 0) << err_.str();
  const Json j = Json::parse(out_.str());
  EXPECT_EQ(j["frames"], 5);
  EXPECT_GT(j["mean_frame_ms"].get<double>(), 0.0);
  EXPECT_GE(j["fit"]["fits"].get<int>(), 20);
  EXPECT_GT(j["fit"]["mean_ms"].get<double>(), 0.0);
}

}  // namespace
}  // namespace vdamf
