// Command line front end: import, train, eval, baseline, defaults.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rlds/app.hpp"
#include "rlds/config.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration (defaults if omitted)");
  cmd->add_option("--seed", opts.seed, "Override the run seed");
}

rlds::RunConfig resolve(const CommonOptions& opts) {
  rlds::RunConfig cfg = opts.config_path.empty() ? rlds::RunConfig{} : rlds::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.validate();
  return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D driving simulator with a DQN agent on a restricted action space"};
  app.require_subcommand(1);

  CommonOptions import_opts;
  std::string osm_path;
  std::string roads_out;
  std::optional<std::size_t> spawn_count;
  auto* import_cmd = app.add_subcommand("import", "Convert OSM XML into a road network file");
  add_common(import_cmd, import_opts);
  import_cmd->add_option("--osm", osm_path, "OSM XML input")->required();
  import_cmd->add_option("--out", roads_out, "Road network JSON output")->required();
  import_cmd->add_option("--spawns", spawn_count, "Number of spawn poses (default 64)");

  CommonOptions train_opts;
  std::optional<std::uint64_t> train_ticks;
  std::string metrics_path;
  std::string checkpoint_path;
  auto* train_cmd = app.add_subcommand("train", "Train an agent, writing metrics and checkpoints");
  add_common(train_cmd, train_opts);
  train_cmd->add_option("--ticks", train_ticks, "Override total_ticks");
  train_cmd->add_option("--metrics", metrics_path, "Override the metrics CSV path");
  train_cmd->add_option("--checkpoint", checkpoint_path, "Override the checkpoint path");

  CommonOptions eval_opts;
  std::string eval_checkpoint;
  std::uint64_t eval_ticks = 100000;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy rollout of a checkpoint");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint to evaluate")->required();
  eval_cmd->add_option("--ticks", eval_ticks, "Simulator ticks to run")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Write the JSON report here instead of stdout");

  CommonOptions base_opts;
  std::uint64_t base_ticks = 100000;
  std::string base_out;
  auto* base_cmd = app.add_subcommand("baseline", "Rollout with uniformly random forward actions");
  add_common(base_cmd, base_opts);
  base_cmd->add_option("--ticks", base_ticks, "Simulator ticks to run")->capture_default_str();
  base_cmd->add_option("--out", base_out, "Write the JSON report here instead of stdout");

  auto* defaults_cmd = app.add_subcommand("defaults", "Print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*import_cmd) {
      std::size_t spawns = 64;
      std::uint64_t seed = 0;
      if (!import_opts.config_path.empty()) {
        const auto cfg = rlds::load_config(import_opts.config_path);
        spawns = cfg.spawns;
        seed = cfg.seed;
      }
      if (spawn_count) spawns = *spawn_count;
      if (import_opts.seed) seed = *import_opts.seed;
      rlds::cmd_import(osm_path, roads_out, spawns, seed);
    } else if (*train_cmd) {
      auto cfg = resolve(train_opts);
      if (train_ticks) cfg.total_ticks = *train_ticks;
      if (!metrics_path.empty()) cfg.metrics = metrics_path;
      if (!checkpoint_path.empty()) cfg.checkpoint = checkpoint_path;
      const auto summary = rlds::cmd_train(cfg);
      std::cerr << "trained " << summary.ticks << " ticks, " << summary.decisions
                << " decisions, " << summary.collisions << " collisions\n";
    } else if (*eval_cmd) {
      emit(rlds::cmd_eval(eval_checkpoint, resolve(eval_opts), eval_ticks).to_json(), eval_out);
    } else if (*base_cmd) {
      emit(rlds::cmd_baseline(resolve(base_opts), base_ticks).to_json(), base_out);
    } else if (*defaults_cmd) {
      std::cout << rlds::serialize_config(rlds::RunConfig{});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
