#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlds/navigator.hpp"
#include "rlds/neural.hpp"
#include "rlds/rl.hpp"
#include "rlds/simulator.hpp"
#include "rlds/vehicle.hpp"

namespace rlds {

struct GridConfig {
  int throttle_count = 20;
  double throttle_min = -0.5;
  double throttle_max = 0.5;
  int steering_count = 100;
  double steering_min = -0.8;
  double steering_max = 0.8;

  ActionGrids make() const {
    return ActionGrids::make(throttle_count, throttle_min, throttle_max, steering_count,
                             steering_min, steering_max);
  }
};

struct NetworkConfig {
  std::vector<int> hidden{400, 300};
  double negative_slope = 0.3;
  double init_std = 0.05;
  AdamParams adam;
  std::string precision = "float32";  ///< "float32" or "float64"
};

/// Every tunable of a run. Defaults reproduce the reference setup.
struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t total_ticks = 5'000'000;
  std::string roads = "roads.json";  ///< file path, or "builtin:loop"
  std::size_t spawns = 64;
  std::string metrics = "metrics.csv";
  std::string checkpoint = "checkpoint.bin";
  std::uint64_t checkpoint_interval = 100'000;
  std::size_t smoothing_window = 5000;

  double dt = 0.02;
  SensorParams sensor;
  VehicleParams vehicle;
  NavParams navigator;  // alpha is taken from the sensor
  GridConfig actions;
  RewardParams reward;
  int memory_length = 1;
  TrainerConfig trainer;
  std::size_t buffer_capacity = 1000;
  bool normalize_inputs = false;
  NetworkConfig network;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::vector<int> network_dims() const;
  InputEncoder encoder() const;
  AgentConfig agent(Policy policy) const;
  NavParams nav_params() const;
};

RunConfig parse_config(const std::string& json_text);
/// Relative paths inside the file are resolved against its directory.
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace rlds
