#include "rlds/app.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rlds/osm_import.hpp"

namespace rlds {

namespace stream {
constexpr std::uint32_t spawns = 0;
constexpr std::uint32_t simulator = 1;
constexpr std::uint32_t navigator = 2;
constexpr std::uint32_t init = 5;
}  // namespace stream

namespace {

std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string dims_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

template <typename Scalar>
TrainSummary train_impl(const RunConfig& config) {
  Simulator sim(build_network(config), config.vehicle,
                SimConfig{config.dt, config.sensor, derive_seed(config.seed, stream::simulator)});
  Navigator navigator(config.actions.make(), config.nav_params(),
                      derive_seed(config.seed, stream::navigator));
  auto net = Mlp<Scalar>::random(config.network_dims(), derive_seed(config.seed, stream::init),
                                 config.network.init_std, config.network.negative_slope);
  AdamState<Scalar> adam(net, config.network.adam);
  Agent<Scalar> agent(sim, navigator, net, &adam, config.agent(Policy::learn), config.seed);

  MetricsWriter metrics(config.metrics, config.smoothing_window);
  auto sink = [&](const DecisionRecord& rec) { metrics.write(rec); };
  std::uint64_t remaining = config.total_ticks;
  while (remaining > 0) {
    const std::uint64_t chunk = std::min(remaining, config.checkpoint_interval);
    agent.run(chunk, sink);
    remaining -= chunk;
    if (remaining > 0) save_checkpoint(config.checkpoint, net, &adam);
  }
  save_checkpoint(config.checkpoint, net, &adam);
  return {sim.ticks(), agent.decisions(), metrics.collisions()};
}

template <typename Scalar>
EvalReport rollout(const RunConfig& config, Mlp<Scalar>& net, Policy policy, std::uint64_t ticks) {
  Simulator sim(build_network(config), config.vehicle,
                SimConfig{config.dt, config.sensor, derive_seed(config.seed, stream::simulator)});
  Navigator navigator(config.actions.make(), config.nav_params(),
                      derive_seed(config.seed, stream::navigator));
  Agent<Scalar> agent(sim, navigator, net, nullptr, config.agent(policy), config.seed);

  EvalReport report;
  report.policy = policy == Policy::greedy ? "greedy" : "random";
  double reward_sum = 0.0;
  double speed_error_sum = 0.0;
  agent.run(ticks, [&](const DecisionRecord& rec) {
    ++report.decisions;
    report.collisions += rec.collision ? 1 : 0;
    reward_sum += rec.reward;
    speed_error_sum += std::abs(rec.v - config.reward.v_bar);
  });
  report.ticks = sim.ticks();
  if (report.decisions > 0) {
    const auto n = static_cast<double>(report.decisions);
    report.collisions_per_1000 = 1000.0 * static_cast<double>(report.collisions) / n;
    report.mean_reward = reward_sum / n;
    report.mean_speed_error = speed_error_sum / n;
  }
  return report;
}

template <typename Scalar>
EvalReport eval_impl(const std::string& checkpoint, const RunConfig& config, std::uint64_t ticks) {
  auto ckpt = load_checkpoint<Scalar>(checkpoint, config.network.negative_slope, config.network.adam);
  if (ckpt.net.dims() != config.network_dims())
    throw std::invalid_argument("checkpoint layer sizes " + dims_string(ckpt.net.dims()) +
                                " do not match the config " + dims_string(config.network_dims()));
  return rollout(config, ckpt.net, Policy::greedy, ticks);
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path, std::size_t window)
    : out_(path, std::ios::trunc), window_(window) {
  if (!out_) throw std::runtime_error("cannot write metrics file: " + path);
  out_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsWriter::write(const DecisionRecord& rec) {
  collisions_ += rec.collision ? 1 : 0;
  recent_.push_back(rec.reward);
  sum_ += rec.reward;
  if (recent_.size() > window_) {
    sum_ -= recent_.front();
    recent_.pop_front();
  }
  std::string row = std::to_string(rec.tick) + ',' + std::to_string(rec.decision) + ',' +
                    fmt_real(rec.reward) + ',' + fmt_real(rec.p_explore) + ',' +
                    (rec.collision ? "1" : "0") + ',' + fmt_real(rec.v) + ',' +
                    (rec.loss ? fmt_real(*rec.loss) : "NA") + ',' + std::to_string(collisions_) +
                    ',' +
                    (recent_.size() == window_ ? fmt_real(sum_ / static_cast<double>(window_)) : "NA");
  out_ << row << '\n' << std::flush;
}

RoadNetwork build_network(const RunConfig& config) {
  const VehicleParams vehicle = config.vehicle;
  const SpawnFilter accept = [vehicle](const Pose& p, const Corridor& c) {
    return footprint_inside(p, c, vehicle);
  };
  const std::uint64_t seed = derive_seed(config.seed, stream::spawns);
  if (config.roads == "builtin:loop") {
    std::vector<RoadSegmentSpec> roads{make_stadium_loop(24.5, 40.0, 5.0)};
    auto spawns = sample_spawns(Corridor(roads), config.spawns, seed, accept);
    return RoadNetwork(std::move(roads), std::move(spawns));
  }
  if (config.roads.rfind("builtin:", 0) == 0)
    throw std::invalid_argument("unknown builtin road network '" + config.roads + "'");
  return load_road_network(config.roads, config.spawns, seed, accept);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["policy"] = policy;
  doc["ticks"] = ticks;
  doc["decisions"] = decisions;
  doc["collisions"] = collisions;
  doc["collisions_per_1000"] = collisions_per_1000;
  doc["mean_reward"] = mean_reward;
  doc["mean_speed_error"] = mean_speed_error;
  return doc.dump(2);
}

void cmd_import(const std::string& osm_path, const std::string& out_path, std::size_t spawns,
                std::uint64_t seed) {
  const osm::OsmData data = osm::parse_osm(read_file(osm_path));
  const osm::Projection proj = osm::centroid_projection(data);
  auto roads = osm::ways_to_roads(data, proj);
  Corridor corridor(roads);
  const VehicleParams vehicle;
  auto poses = sample_spawns(corridor, spawns, seed, [&](const Pose& p, const Corridor& c) {
    return footprint_inside(p, c, vehicle);
  });
  const std::string doc = serialize_road_network(roads, poses);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << doc;
  if (!out) throw std::runtime_error("failed writing " + out_path);
}

TrainSummary cmd_train(const RunConfig& config) {
  config.validate();
  if (config.network.precision == "float64") return train_impl<double>(config);
  return train_impl<float>(config);
}

EvalReport cmd_eval(const std::string& checkpoint, const RunConfig& config, std::uint64_t ticks) {
  config.validate();
  if (config.network.precision == "float64") return eval_impl<double>(checkpoint, config, ticks);
  return eval_impl<float>(checkpoint, config, ticks);
}

EvalReport cmd_baseline(const RunConfig& config, std::uint64_t ticks) {
  config.validate();
  Mlp<double> net(config.network_dims(), config.network.negative_slope);
  return rollout(config, net, Policy::random, ticks);
}

}  // namespace rlds
