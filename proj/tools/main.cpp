#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "bsi/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Bayesian system identification for twin-girder bridges with correlated "
      "model-prediction error"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  std::string out_dir;
  bool out_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--seed", seed, "override every seed in the config")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--workers", workers, "worker threads (1 = deterministic mode)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
  };

  auto* bench = app.add_subcommand("loglik-bench", "time dense vs structured likelihoods");
  auto* study = app.add_subcommand("study", "synthetic identification study");
  auto* infer = app.add_subcommand("infer", "single-model nested-sampling inference");
  auto* select = app.add_subcommand("select", "Bayesian model selection over a pool");
  auto* predict = app.add_subcommand("predict", "posterior predictive from a run archive");
  auto* sweep = app.add_subcommand("sweep", "peak stress vs one structural parameter");
  for (auto* cmd : {bench, study, infer, select, predict, sweep}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  bsi::CliOptions opts;
  if (seed_set) opts.seed = seed;
  opts.workers = workers;
  if (out_set) opts.out_dir = out_dir;

  try {
    const bsi::RunConfig cfg = bsi::load_config(config_path);
    if (bench->parsed()) bsi::cmd_loglik_bench(cfg, opts);
    if (study->parsed()) bsi::cmd_study(cfg, opts);
    if (infer->parsed()) bsi::cmd_infer(cfg, opts);
    if (select->parsed()) bsi::cmd_select(cfg, opts);
    if (predict->parsed()) bsi::cmd_predict(cfg, opts);
    if (sweep->parsed()) bsi::cmd_sweep(cfg, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
