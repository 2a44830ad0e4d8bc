#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nrgcn/attacks.hpp"
#include "nrgcn/graph.hpp"
#include "nrgcn/model.hpp"
#include "nrgcn/precompute.hpp"

namespace nrgcn {

struct Seeds {
  std::uint64_t sampling = 1;
  std::uint64_t init = 2;
  std::uint64_t training = 3;
};

// One experiment = one JSON config; every field overridable on the
// command line (flag wins).
struct ExperimentConfig {
  std::string bundle_dir;
  SamplingPlan plan;
  int hidden = 128;
  int mlp_hidden = 0;  // 0: same as hidden
  TrainConfig train;
  Seeds seeds;
  int num_seeds = 5;
  bool normalize_features = true;
  int threads = 1;
  std::string out_dir = ".";

  // Attack grid (cmd_attack only).
  AttackMode attack_mode = AttackMode::kEvasion;
  std::vector<int> attack_budgets;
  bool attack_insert_external = false;

  int mlp_hidden_dim() const { return mlp_hidden > 0 ? mlp_hidden : hidden; }

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

struct MetricsReport {
  std::vector<EpochStats> history;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  double precompute_seconds = 0.0;
  double train_seconds = 0.0;
  double mean_epoch_seconds = 0.0;
  nlohmann::json config_echo;
  Seeds seeds;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

// Build tensor, init, train, evaluate. seed_offset shifts all three seed
// streams, giving independent runs for multi-seed reports.
MetricsReport run_train_once(const Bundle& bundle, const ExperimentConfig& config,
                             std::uint64_t seed_offset,
                             ModelParams* trained = nullptr);

// Table-2 protocol. Evasion: train on the clean tensor, evaluate the test
// mask on a tensor rebuilt from the attacked graph. Poisoning: train on
// the attacked graph's tensor, evaluate on the clean graph's tensor. The
// same sampling seed feeds both tensors, so T=0 reproduces the clean run
// bit-for-bit.
double run_attack_experiment(const Bundle& bundle, const ExperimentConfig& config,
                             const AttackSpec& spec, std::uint64_t seed_offset);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

// Subcommand bodies; each prints a human-readable table to `out` and
// writes CSV files under config.out_dir.
void cmd_precompute(const ExperimentConfig& config, std::ostream& out);
void cmd_train(const ExperimentConfig& config, std::ostream& out);
void cmd_eval(const ExperimentConfig& config, const std::string& checkpoint,
              std::ostream& out);
void cmd_attack(const ExperimentConfig& config, std::ostream& out);
void cmd_sweep_p2(const ExperimentConfig& config, const std::vector<int>& p2_values,
                  std::ostream& out);
void cmd_bench(const ExperimentConfig& config, std::ostream& out);

}  // namespace nrgcn
