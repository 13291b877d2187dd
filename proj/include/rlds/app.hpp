#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <optional>
#include <string>

#include "rlds/config.hpp"
#include "rlds/geometry.hpp"
#include "rlds/rl.hpp"

namespace rlds {

inline constexpr const char* kMetricsHeader =
    "tick,decision,reward,p_explore,collision,v,loss,collisions_cum,reward_smoothed";

/// Appends one flushed CSV row per completed transition. Loss during warm-up
/// and the smoothed reward before its window fills are written as NA.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, std::size_t window);

  void write(const DecisionRecord& rec);
  std::uint64_t collisions() const { return collisions_; }

 private:
  std::ofstream out_;
  std::size_t window_;
  std::deque<double> recent_;
  double sum_ = 0.0;
  std::uint64_t collisions_ = 0;
};

/// Network built from config.roads ("builtin:loop" is the synthetic ~300 m
/// closed track).
RoadNetwork build_network(const RunConfig& config);

struct EvalReport {
  std::string policy;
  std::uint64_t ticks = 0;
  std::uint64_t decisions = 0;
  std::uint64_t collisions = 0;
  double collisions_per_1000 = 0.0;
  double mean_reward = 0.0;
  double mean_speed_error = 0.0;

  std::string to_json() const;
};

struct TrainSummary {
  std::uint64_t ticks = 0;
  std::uint64_t decisions = 0;
  std::uint64_t collisions = 0;
};

/// OSM XML file -> road network file.
void cmd_import(const std::string& osm_path, const std::string& out_path, std::size_t spawns,
                std::uint64_t seed);

/// Runs the learning agent for config.total_ticks, writing metrics and
/// checkpoints to the paths in the config.
TrainSummary cmd_train(const RunConfig& config);

/// Greedy rollout of a checkpoint, no training.
EvalReport cmd_eval(const std::string& checkpoint, const RunConfig& config, std::uint64_t ticks);

/// Uniform forward-action rollout, no training.
EvalReport cmd_baseline(const RunConfig& config, std::uint64_t ticks);

}  // namespace rlds
