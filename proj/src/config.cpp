#include "rlds/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rlds {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config field '" + field + "': " + what);
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) field_error(field, what);
}

/// Reads known keys of one JSON object and rejects the rest.
class Fields {
 public:
  Fields(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) field_error(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    const json& v = *it;
    const std::string name = prefix_ + key;
    if constexpr (std::is_same_v<T, bool>) {
      require(v.is_boolean(), name, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      require(v.is_string(), name, "expected a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      require(v.is_number(), name, "expected a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      require(v.is_number_unsigned(), name, "expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      require(v.is_number_integer(), name, "expected an integer");
    } else {
      require(v.is_array(), name, "expected an array");
    }
    try {
      out = v.get<T>();
    } catch (const json::exception& e) {
      field_error(name, e.what());
    }
  }

  template <typename Fn>
  void section(const std::string& key, Fn&& fn) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    Fields sub(*it, prefix_ + key + ".");
    fn(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key)) field_error(prefix_ + key, "unknown field");
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  auto guard = [](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      field_error(field, e.what());
    }
  };
  guard("sensor", [&] { sensor.validate(); });
  guard("vehicle", [&] { vehicle.validate(); });
  require(dt > 0.0, "sim.dt", "must be > 0");
  require(total_ticks <= (1ULL << 53), "total_ticks", "too large");
  require(spawns >= 1, "spawns", "must be >= 1");
  require(checkpoint_interval >= 1, "checkpoint_interval", "must be >= 1");
  require(smoothing_window >= 1, "smoothing_window", "must be >= 1");
  require(!roads.empty(), "roads", "must name a road network file");

  require(navigator.open_margin >= 0.0, "navigator.open_margin", "must be >= 0");
  require(navigator.min_run >= 1, "navigator.min_run", "must be >= 1");
  require(navigator.regions >= 1, "navigator.regions", "must be >= 1");
  require(sensor.ray_count % navigator.regions == 0, "navigator.regions",
          "must divide sensor.ray_count");
  require(actions.steering_count % navigator.regions == 0, "navigator.regions",
          "must divide actions.steering_count");

  require(actions.throttle_count >= 2, "actions.throttle_count", "must be >= 2");
  require(actions.steering_count >= 2, "actions.steering_count", "must be >= 2");
  require(actions.throttle_min < actions.throttle_max, "actions.throttle_max",
          "must exceed throttle_min");
  require(actions.steering_min < actions.steering_max, "actions.steering_max",
          "must exceed steering_min");
  require(actions.throttle_max > 0.0, "actions.throttle_max",
          "must be > 0 so exploration has forward actions");
  require(actions.throttle_min >= -1.0 && actions.throttle_max <= 1.0, "actions.throttle_min",
          "throttle grid must stay within [-1, 1]");
  require(actions.steering_min >= -1.0 && actions.steering_max <= 1.0, "actions.steering_min",
          "steering grid must stay within [-1, 1]");

  for (double t : reward.theta) require(t > 0.0, "reward.theta", "all entries must be > 0");
  require(reward.v_bar > 0.0, "reward.v_bar", "must be > 0");
  require(reward.d_bar > 0.0, "reward.d_bar", "must be > 0");

  require(memory_length >= 1, "agent.memory_length", "must be >= 1");
  require(trainer.gamma >= 0.0 && trainer.gamma < 1.0, "agent.gamma", "must be in [0, 1)");
  require(trainer.batch >= 1, "agent.batch", "must be >= 1");
  require(trainer.n >= 2, "agent.n", "must be >= 2");
  require(trainer.explore.base > 0.0 && trainer.explore.base <= 1.0, "agent.explore_base",
          "must be in (0, 1]");
  require(buffer_capacity >= trainer.batch, "agent.buffer_capacity", "must be >= agent.batch");
  require(buffer_capacity >= trainer.warmup, "agent.buffer_capacity",
          "must be >= agent.warmup or training never starts");

  require(!network.hidden.empty(), "network.hidden", "needs at least one hidden layer");
  for (int h : network.hidden) require(h > 0, "network.hidden", "sizes must be > 0");
  require(network.negative_slope >= 0.0 && network.negative_slope < 1.0,
          "network.negative_slope", "must be in [0, 1)");
  require(network.init_std > 0.0, "network.init_std", "must be > 0");
  require(network.adam.lr > 0.0, "network.lr", "must be > 0");
  require(network.adam.beta1 >= 0.0 && network.adam.beta1 < 1.0, "network.beta1",
          "must be in [0, 1)");
  require(network.adam.beta2 >= 0.0 && network.adam.beta2 < 1.0, "network.beta2",
          "must be in [0, 1)");
  require(network.adam.epsilon > 0.0, "network.epsilon", "must be > 0");
  require(network.precision == "float32" || network.precision == "float64",
          "network.precision", "must be \"float32\" or \"float64\"");
}

std::vector<int> RunConfig::network_dims() const {
  std::vector<int> dims{encoder().input_dim()};
  dims.insert(dims.end(), network.hidden.begin(), network.hidden.end());
  dims.push_back(1);
  return dims;
}

InputEncoder RunConfig::encoder() const {
  return {memory_length, sensor.ray_count, reward.v_bar, sensor.alpha, normalize_inputs};
}

NavParams RunConfig::nav_params() const {
  NavParams p = navigator;
  p.alpha = sensor.alpha;
  return p;
}

AgentConfig RunConfig::agent(Policy policy) const {
  AgentConfig cfg;
  cfg.trainer = trainer;
  cfg.reward = reward;
  cfg.encoder = encoder();
  cfg.buffer_capacity = buffer_capacity;
  cfg.policy = policy;
  return cfg;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Fields root(doc, "");
  root.read("seed", c.seed);
  root.read("total_ticks", c.total_ticks);
  root.read("roads", c.roads);
  root.read("spawns", c.spawns);
  root.read("metrics", c.metrics);
  root.read("checkpoint", c.checkpoint);
  root.read("checkpoint_interval", c.checkpoint_interval);
  root.read("smoothing_window", c.smoothing_window);
  root.section("sim", [&](Fields& f) { f.read("dt", c.dt); });
  root.section("sensor", [&](Fields& f) {
    f.read("alpha", c.sensor.alpha);
    f.read("beta_deg", c.sensor.beta_deg);
    f.read("ray_count", c.sensor.ray_count);
  });
  root.section("vehicle", [&](Fields& f) {
    f.read("wheelbase", c.vehicle.wheelbase);
    f.read("max_wheel_angle", c.vehicle.max_wheel_angle);
    f.read("a_max", c.vehicle.a_max);
    f.read("b_max", c.vehicle.b_max);
    f.read("drag", c.vehicle.drag);
    f.read("length", c.vehicle.length);
    f.read("width", c.vehicle.width);
  });
  root.section("navigator", [&](Fields& f) {
    f.read("open_margin", c.navigator.open_margin);
    f.read("min_run", c.navigator.min_run);
    f.read("regions", c.navigator.regions);
  });
  root.section("actions", [&](Fields& f) {
    f.read("throttle_count", c.actions.throttle_count);
    f.read("throttle_min", c.actions.throttle_min);
    f.read("throttle_max", c.actions.throttle_max);
    f.read("steering_count", c.actions.steering_count);
    f.read("steering_min", c.actions.steering_min);
    f.read("steering_max", c.actions.steering_max);
  });
  root.section("reward", [&](Fields& f) {
    std::vector<double> theta(c.reward.theta.begin(), c.reward.theta.end());
    f.read("theta", theta);
    if (theta.size() != 3) field_error("reward.theta", "expected exactly 3 values");
    std::copy(theta.begin(), theta.end(), c.reward.theta.begin());
    f.read("v_bar", c.reward.v_bar);
    f.read("d_bar", c.reward.d_bar);
    f.read("collision_reward", c.reward.collision_reward);
  });
  root.section("agent", [&](Fields& f) {
    f.read("memory_length", c.memory_length);
    f.read("gamma", c.trainer.gamma);
    f.read("batch", c.trainer.batch);
    f.read("warmup", c.trainer.warmup);
    f.read("buffer_capacity", c.buffer_capacity);
    f.read("n", c.trainer.n);
    f.read("explore_t0", c.trainer.explore.t0);
    f.read("explore_base", c.trainer.explore.base);
    f.read("normalize_inputs", c.normalize_inputs);
  });
  root.section("network", [&](Fields& f) {
    f.read("hidden", c.network.hidden);
    f.read("negative_slope", c.network.negative_slope);
    f.read("init_std", c.network.init_std);
    f.read("lr", c.network.adam.lr);
    f.read("beta1", c.network.adam.beta1);
    f.read("beta2", c.network.adam.beta2);
    f.read("epsilon", c.network.adam.epsilon);
    f.read("precision", c.network.precision);
  });
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config(buf.str());
  namespace fs = std::filesystem;
  if (c.roads.rfind("builtin:", 0) != 0 && fs::path(c.roads).is_relative())
    c.roads = (fs::path(path).parent_path() / c.roads).lexically_normal().string();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  nlohmann::ordered_json doc;
  doc["seed"] = c.seed;
  doc["total_ticks"] = c.total_ticks;
  doc["roads"] = c.roads;
  doc["spawns"] = c.spawns;
  doc["metrics"] = c.metrics;
  doc["checkpoint"] = c.checkpoint;
  doc["checkpoint_interval"] = c.checkpoint_interval;
  doc["smoothing_window"] = c.smoothing_window;
  doc["sim"] = {{"dt", c.dt}};
  doc["sensor"] = {{"alpha", c.sensor.alpha},
                   {"beta_deg", c.sensor.beta_deg},
                   {"ray_count", c.sensor.ray_count}};
  doc["vehicle"] = {{"wheelbase", c.vehicle.wheelbase}, {"max_wheel_angle", c.vehicle.max_wheel_angle},
                    {"a_max", c.vehicle.a_max},         {"b_max", c.vehicle.b_max},
                    {"drag", c.vehicle.drag},           {"length", c.vehicle.length},
                    {"width", c.vehicle.width}};
  doc["navigator"] = {{"open_margin", c.navigator.open_margin},
                      {"min_run", c.navigator.min_run},
                      {"regions", c.navigator.regions}};
  doc["actions"] = {{"throttle_count", c.actions.throttle_count},
                    {"throttle_min", c.actions.throttle_min},
                    {"throttle_max", c.actions.throttle_max},
                    {"steering_count", c.actions.steering_count},
                    {"steering_min", c.actions.steering_min},
                    {"steering_max", c.actions.steering_max}};
  doc["reward"] = {{"theta", c.reward.theta},
                   {"v_bar", c.reward.v_bar},
                   {"d_bar", c.reward.d_bar},
                   {"collision_reward", c.reward.collision_reward}};
  doc["agent"] = {{"memory_length", c.memory_length},
                  {"gamma", c.trainer.gamma},
                  {"batch", c.trainer.batch},
                  {"warmup", c.trainer.warmup},
                  {"buffer_capacity", c.buffer_capacity},
                  {"n", c.trainer.n},
                  {"explore_t0", c.trainer.explore.t0},
                  {"explore_base", c.trainer.explore.base},
                  {"normalize_inputs", c.normalize_inputs}};
  doc["network"] = {{"hidden", c.network.hidden},
                    {"negative_slope", c.network.negative_slope},
                    {"init_std", c.network.init_std},
                    {"lr", c.network.adam.lr},
                    {"beta1", c.network.adam.beta1},
                    {"beta2", c.network.adam.beta2},
                    {"epsilon", c.network.adam.epsilon},
                    {"precision", c.network.precision}};
  return doc.dump(2) + "\n";
}

}  // namespace rlds
