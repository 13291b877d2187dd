#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rlds/app.hpp"
#include "rlds/config.hpp"

namespace fs = std::filesystem;

namespace {

const char* kFragment = R"(<?xml version="1.0"?>
<osm version="0.6">
  <node id="1" lat="50.202975" lon="9.1880"/>
  <node id="2" lat="50.202975" lon="9.1890"/>
  <node id="3" lat="50.203600" lon="9.1896"/>
  <way id="10"><nd ref="1"/><nd ref="2"/><nd ref="3"/><tag k="highway" v="residential"/></way>
</osm>)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rlds_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Runs the CLI; returns the exit code and leaves stderr in err.txt.
  int run(const std::string& args) const {
    const std::string cmd = std::string(RLDS_CLI_PATH) + " " + args + " >" + path("out.txt") +
                            " 2>" + path("err.txt");
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  // Small network so the loop runs quickly.
  std::string small_config(const std::string& extra = "") const {
    return R"({"roads":"builtin:loop","metrics":")" + path("m.csv") + R"(","checkpoint":")" +
           path("c.bin") + R"(","total_ticks":3000,"network":{"hidden":[16,8]},)" +
           R"("agent":{"warmup":50})" + extra + "}";
  }

  fs::path dir_;
};

TEST_F(CliTest, ImportFragment) {
  write("a.osm", kFragment);
  ASSERT_EQ(run("import --osm " + path("a.osm") + " --out " + path("r1.json")), 0) << read("err.txt");
  ASSERT_EQ(run("import --osm " + path("a.osm") + " --out " + path("r2.json")), 0);
  const auto doc = read("r1.json");
  EXPECT_EQ(doc, read("r2.json"));
  const auto net = rlds::parse_road_network(doc);
  ASSERT_EQ(net.roads().size(), 1u);
  EXPECT_EQ(net.roads()[0].width, 5.0);
  EXPECT_EQ(net.roads()[0].centerline.size(), 3u);
  EXPECT_EQ(net.spawns().size(), 64u);
}

TEST_F(CliTest, ImportFootwaysOnly) {
  write("f.osm", R"(<osm><node id="1" lat="50" lon="9"/><node id="2" lat="50" lon="9.001"/>)"
                 R"(<way id="3"><nd ref="1"/><nd ref="2"/><tag k="highway" v="footway"/></way></osm>)");
  EXPECT_NE(run("import --osm " + path("f.osm") + " --out " + path("r.json")), 0);
  EXPECT_NE(read("err.txt").find("no drivable roads"), std::string::npos) << read("err.txt");
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, TrainZeroTicksWritesHeaderOnly) {
  write("cfg.json", R"({"roads":"builtin:loop","total_ticks":0,"metrics":")" + path("m.csv") +
                        R"(","checkpoint":")" + path("c.bin") + R"("})");
  ASSERT_EQ(run("train --config " + path("cfg.json")), 0) << read("err.txt");
  EXPECT_EQ(read("m.csv"), std::string(rlds::kMetricsHeader) + "\n");
}

TEST_F(CliTest, TrainIsDeterministicAndMarksWarmup) {
  write("cfg.json", small_config());
  ASSERT_EQ(run("train --config " + path("cfg.json")), 0) << read("err.txt");
  const auto first = read("m.csv");
  ASSERT_EQ(run("train --config " + path("cfg.json")), 0);
  EXPECT_EQ(first, read("m.csv"));

  std::istringstream rows(first);
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, rlds::kMetricsHeader);
  int n = 0;
  bool saw_loss = false;
  while (std::getline(rows, line)) {
    ++n;
    const auto loss_field = [&] {
      std::stringstream s(line);
      std::string f;
      for (int i = 0; i < 7; ++i) std::getline(s, f, ',');
      return f;
    }();
    if (n < 50) { EXPECT_EQ(loss_field, "NA") << line; }
    if (loss_field != "NA") saw_loss = true;
  }
  EXPECT_GT(n, 250);
  EXPECT_TRUE(saw_loss);
  ASSERT_TRUE(fs::exists(path("c.bin")));

  // The seed override changes the stream.
  ASSERT_EQ(run("train --config " + path("cfg.json") + " --seed 7"), 0);
  EXPECT_NE(first, read("m.csv"));
}

TEST_F(CliTest, EvalAndBaseline) {
  write("cfg.json", small_config());
  ASSERT_EQ(run("train --config " + path("cfg.json")), 0) << read("err.txt");
  ASSERT_EQ(run("eval --config " + path("cfg.json") + " --checkpoint " + path("c.bin") +
                " --ticks 2000 --out " + path("e1.json")),
            0)
      << read("err.txt");
  ASSERT_EQ(run("eval --config " + path("cfg.json") + " --checkpoint " + path("c.bin") +
                " --ticks 2000 --out " + path("e2.json")),
            0);
  EXPECT_EQ(read("e1.json"), read("e2.json"));
  const auto report = nlohmann::json::parse(read("e1.json"));
  EXPECT_EQ(report["policy"], "greedy");
  EXPECT_EQ(report["ticks"], 2000);

  ASSERT_EQ(run("baseline --config " + path("cfg.json") + " --ticks 2000"), 0);
  EXPECT_EQ(nlohmann::json::parse(read("out.txt"))["policy"], "random");

  // Same checkpoint against a config with different hidden sizes.
  write("other.json", R"({"roads":"builtin:loop","network":{"hidden":[32,8]}})");
  EXPECT_NE(run("eval --config " + path("other.json") + " --checkpoint " + path("c.bin")), 0);
  EXPECT_NE(read("err.txt").find("do not match"), std::string::npos) << read("err.txt");
}

TEST_F(CliTest, ZeroCheckpointEval) {
  const rlds::RunConfig cfg = rlds::parse_config(R"({"roads":"builtin:loop","network":{"hidden":[16,8]}})");
  rlds::save_checkpoint(path("z.bin"), rlds::Mlp<float>(cfg.network_dims()));
  const auto report = rlds::cmd_eval(path("z.bin"), cfg, 500);
  EXPECT_EQ(report.ticks, 500u);
  EXPECT_EQ(report.decisions, 50u);
}

TEST_F(CliTest, InvalidConfigNamesField) {
  write("bad.json", R"({"agent":{"gamma":1.5}})");
  EXPECT_NE(run("train --config " + path("bad.json")), 0);
  EXPECT_NE(read("err.txt").find("agent.gamma"), std::string::npos) << read("err.txt");
  write("bad2.json", R"({"sensor":{"alpah":3}})");
  EXPECT_NE(run("train --config " + path("bad2.json")), 0);
  EXPECT_NE(read("err.txt").find("sensor.alpah"), std::string::npos) << read("err.txt");
}

TEST(Config, RoundTrip) {
  rlds::RunConfig cfg;
  cfg.seed = 99;
  cfg.sensor.alpha = 10.0;
  cfg.network.hidden = {64, 32};
  cfg.reward.theta = {0.5, 1.5, 2.5};
  cfg.trainer.explore.base = 0.9999;
  cfg.network.precision = "float64";
  const auto text = rlds::serialize_config(cfg);
  const auto again = rlds::parse_config(text);
  EXPECT_EQ(rlds::serialize_config(again), text);
  EXPECT_EQ(again.seed, 99u);
  EXPECT_EQ(again.network.hidden, (std::vector<int>{64, 32}));
  EXPECT_EQ(again.network_dims(), (std::vector<int>{30, 64, 32, 1}));
}

TEST(Config, FieldErrors) {
  auto message = [](const std::string& text) {
    try {
      rlds::parse_config(text).validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"sensor":{"ray_count":1}})").find("sensor"), std::string::npos);
  EXPECT_NE(message(R"({"seed":-3})").find("seed"), std::string::npos);
  EXPECT_NE(message(R"({"agent":{"n":1}})").find("agent.n"), std::string::npos);
  EXPECT_NE(message(R"({"network":{"precision":"float16"}})").find("network.precision"),
            std::string::npos);
  EXPECT_NE(message("{not json").find("not valid JSON"), std::string::npos);
}

}  // namespace
