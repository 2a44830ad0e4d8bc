#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "nrgcn/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"NRGCN experiment driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool deterministic = false;

  app.add_option("--config", config_path, "experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "base seed for sampling/init/training")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_flag("--deterministic", deterministic,
               "single-threaded, bit-reproducible mode");

  auto* precompute = app.add_subcommand("precompute", "build and cache the embedding tensor");
  auto* train = app.add_subcommand("train", "train and report multi-seed accuracy");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* attack = app.add_subcommand("attack", "run the DICE attack grid");
  auto* sweep = app.add_subcommand("sweep-p2", "sweep the layer-2 parent count");
  auto* bench = app.add_subcommand("bench", "precompute vs training cost benchmark");

  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "model checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<int> p2_values{1, 2, 3, 4, 5};
  sweep->add_option("--p2", p2_values, "P_2 values to sweep");

  // global flags may appear after the subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = nrgcn::ExperimentConfig::from_file(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_given) {
      config.seeds = {seed, seed + 1, seed + 2};
    }
    if (deterministic) config.threads = 1;

    if (precompute->parsed()) {
      nrgcn::cmd_precompute(config, std::cout);
    } else if (train->parsed()) {
      nrgcn::cmd_train(config, std::cout);
    } else if (eval->parsed()) {
      nrgcn::cmd_eval(config, checkpoint, std::cout);
    } else if (attack->parsed()) {
      nrgcn::cmd_attack(config, std::cout);
    } else if (sweep->parsed()) {
      nrgcn::cmd_sweep_p2(config, p2_values, std::cout);
    } else if (bench->parsed()) {
      nrgcn::cmd_bench(config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
