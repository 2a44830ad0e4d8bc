#include "nrgcn/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <stdexcept>

namespace nrgcn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

SamplingPlan plan_from_json(const json& j) {
  SamplingPlan plan;
  for (const auto& layer : j) {
    plan.layers.push_back({layer.at("P").get<int>(), layer.at("S").get<int>(),
                           layer.at("L").get<int>()});
  }
  plan.validate();
  return plan;
}

json plan_to_json(const SamplingPlan& plan) {
  json j = json::array();
  for (const auto& layer : plan.layers) {
    j.push_back({{"P", layer.parents}, {"S", layer.repeats}, {"L", layer.subset}});
  }
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.bundle_dir = j.at("bundle").get<std::string>();
  c.plan = plan_from_json(j.at("plan"));
  c.hidden = j.value("hidden", c.hidden);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.train.batch_size = j.value("batch_size", c.train.batch_size);
  c.train.max_epochs = j.value("epochs", c.train.max_epochs);
  c.train.learning_rate = j.value("learning_rate", c.train.learning_rate);
  c.train.weight_decay = j.value("weight_decay", c.train.weight_decay);
  c.train.dropout = j.value("dropout", c.train.dropout);
  c.train.patience = j.value("patience", c.train.patience);
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    c.seeds.sampling = s.value("sampling", c.seeds.sampling);
    c.seeds.init = s.value("init", c.seeds.init);
    c.seeds.training = s.value("training", c.seeds.training);
  }
  c.num_seeds = j.value("num_seeds", c.num_seeds);
  c.normalize_features = j.value("normalize_features", c.normalize_features);
  c.threads = j.value("threads", c.threads);
  c.out_dir = j.value("out", c.out_dir);
  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    const auto mode = a.value("mode", std::string("evasion"));
    if (mode == "evasion") {
      c.attack_mode = AttackMode::kEvasion;
    } else if (mode == "poisoning") {
      c.attack_mode = AttackMode::kPoisoning;
    } else {
      throw std::runtime_error("unknown attack mode: " + mode);
    }
    c.attack_budgets = a.value("budgets", std::vector<int>{});
    c.attack_insert_external = a.value("insert_external", false);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed JSON: " + e.what());
  }
  auto config = from_json(j);
  if (!fs::exists(config.bundle_dir)) {
    throw std::runtime_error("bundle directory does not exist: " +
                             config.bundle_dir);
  }
  return config;
}

json ExperimentConfig::to_json() const {
  json j{{"bundle", bundle_dir},
         {"plan", plan_to_json(plan)},
         {"hidden", hidden},
         {"mlp_hidden", mlp_hidden},
         {"batch_size", train.batch_size},
         {"epochs", train.max_epochs},
         {"learning_rate", train.learning_rate},
         {"weight_decay", train.weight_decay},
         {"dropout", train.dropout},
         {"patience", train.patience},
         {"seeds",
          {{"sampling", seeds.sampling},
           {"init", seeds.init},
           {"training", seeds.training}}},
         {"num_seeds", num_seeds},
         {"normalize_features", normalize_features},
         {"threads", threads},
         {"out", out_dir}};
  if (!attack_budgets.empty()) {
    j["attack"] = {{"mode", attack_mode == AttackMode::kEvasion ? "evasion"
                                                                : "poisoning"},
                   {"budgets", attack_budgets},
                   {"insert_external", attack_insert_external}};
  }
  return j;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

MetricsReport run_train_once(const Bundle& bundle, const ExperimentConfig& config,
                             std::uint64_t seed_offset, ModelParams* trained) {
  MetricsReport report;
  report.seeds = {config.seeds.sampling + seed_offset,
                  config.seeds.init + seed_offset,
                  config.seeds.training + seed_offset};
  report.config_echo = config.to_json();

  const auto t0 = std::chrono::steady_clock::now();
  const EmbeddingTensor tensor =
      build_embedding_tensor(bundle.graph, bundle.features, config.plan,
                             report.seeds.sampling, config.threads);
  report.precompute_seconds = seconds_since(t0);

  RandomSource init_rng(report.seeds.init);
  ModelParams params = ModelParams::init(
      config.plan, tensor.dim, config.hidden, config.mlp_hidden_dim(),
      bundle.labels.num_classes, init_rng);

  TrainConfig tc = config.train;
  tc.seed = report.seeds.training;
  const auto t1 = std::chrono::steady_clock::now();
  const TrainResult result = train(params, tensor, bundle.labels, bundle.masks, tc);
  report.train_seconds = seconds_since(t1);
  report.history = result.history;
  if (!report.history.empty()) {
    double total = 0.0;
    for (const auto& e : report.history) total += e.seconds;
    report.mean_epoch_seconds = total / static_cast<double>(report.history.size());
  }
  report.train_accuracy =
      evaluate(params, tensor, bundle.labels, bundle.masks.train);
  report.val_accuracy = result.best_val_accuracy;
  report.test_accuracy = result.test_accuracy_at_best;
  if (trained) *trained = params;
  return report;
}

double run_attack_experiment(const Bundle& bundle, const ExperimentConfig& config,
                             const AttackSpec& spec, std::uint64_t seed_offset) {
  RandomSource attack_rng(spec.seed);
  const AttackResult attack =
      apply_dice(bundle.graph, bundle.labels, bundle.masks, spec, attack_rng);
  const std::uint64_t sampling_seed = config.seeds.sampling + seed_offset;

  Bundle train_bundle{spec.mode == AttackMode::kPoisoning ? attack.graph
                                                          : bundle.graph,
                      bundle.features, bundle.labels, bundle.masks};
  ExperimentConfig train_config = config;
  ModelParams params;
  run_train_once(train_bundle, train_config, seed_offset, &params);

  const Graph& eval_graph =
      spec.mode == AttackMode::kEvasion ? attack.graph : bundle.graph;
  const EmbeddingTensor eval_tensor = build_embedding_tensor(
      eval_graph, bundle.features, config.plan, sampling_seed, config.threads);
  return evaluate(params, eval_tensor, bundle.labels, bundle.masks.test);
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path);
  out << "epoch,train_loss,val_acc,test_acc,epoch_seconds\n";
  for (const auto& e : history) {
    out << e.epoch << "," << e.train_loss << "," << e.val_accuracy << ","
        << e.test_accuracy << "," << e.seconds << "\n";
  }
}

namespace {

std::string cache_path(const ExperimentConfig& config) {
  return config.out_dir + "/embeddings.nrgc";
}

// Load-or-rebuild with the stale/corrupt guards. Returns build seconds
// (0 on a cache hit).
EmbeddingTensor cached_tensor(const ExperimentConfig& config, const Bundle& bundle,
                              const std::string& hash, double& build_seconds,
                              std::ostream& out) {
  build_seconds = 0.0;
  const std::string path = cache_path(config);
  if (fs::exists(path)) {
    try {
      return load_cache(path, &hash, &config.plan, &config.seeds.sampling);
    } catch (const std::exception& e) {
      out << "warning: " << e.what() << "; rebuilding\n";
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  EmbeddingTensor tensor =
      build_embedding_tensor(bundle.graph, bundle.features, config.plan,
                             config.seeds.sampling, config.threads);
  tensor.source_hash = hash;
  build_seconds = seconds_since(t0);
  save_cache(tensor, path);
  return tensor;
}

}  // namespace

void cmd_precompute(const ExperimentConfig& config, std::ostream& out) {
  fs::create_directories(config.out_dir);
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);
  const std::string hash = bundle_hash(config.bundle_dir);
  double build_seconds = 0.0;
  const EmbeddingTensor tensor =
      cached_tensor(config, bundle, hash, build_seconds, out);
  out << "embedding tensor " << tensor.num_nodes << " x " << tensor.slots
      << " x " << tensor.dim << " at " << cache_path(config) << "\n"
      << "build_seconds " << build_seconds << "\n";
}

void cmd_train(const ExperimentConfig& config, std::ostream& out) {
  fs::create_directories(config.out_dir);
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);

  std::vector<double> test_accs;
  std::vector<double> val_accs;
  for (int s = 0; s < config.num_seeds; ++s) {
    ModelParams params;
    const MetricsReport report =
        run_train_once(bundle, config, static_cast<std::uint64_t>(s), &params);
    test_accs.push_back(report.test_accuracy);
    val_accs.push_back(report.val_accuracy);
    write_history_csv(report.history, config.out_dir + "/history_seed" +
                                          std::to_string(s) + ".csv");
    save_checkpoint(params, config.out_dir + "/checkpoint_seed" +
                                std::to_string(s) + ".nrgm");
    {
      std::ofstream rep(config.out_dir + "/report_seed" + std::to_string(s) +
                        ".json");
      json j{{"config", report.config_echo},
             {"seeds",
              {{"sampling", report.seeds.sampling},
               {"init", report.seeds.init},
               {"training", report.seeds.training}}},
             {"train_accuracy", report.train_accuracy},
             {"val_accuracy", report.val_accuracy},
             {"test_accuracy", report.test_accuracy},
             {"precompute_seconds", report.precompute_seconds},
             {"train_seconds", report.train_seconds},
             {"mean_epoch_seconds", report.mean_epoch_seconds}};
      rep << j.dump(2) << "\n";
    }
    out << "seed " << s << "  val " << std::fixed << std::setprecision(4)
        << report.val_accuracy << "  test " << report.test_accuracy << "\n";
  }
  const MeanStd test = mean_std(test_accs);
  const MeanStd val = mean_std(val_accs);
  out << "val  mean " << val.mean << " +/- " << val.stddev << "\n"
      << "test mean " << test.mean << " +/- " << test.stddev << "\n";
  {
    std::ofstream csv(config.out_dir + "/summary.csv");
    csv << "metric,mean,std\nval_acc," << val.mean << "," << val.stddev
        << "\ntest_acc," << test.mean << "," << test.stddev << "\n";
  }
}

void cmd_eval(const ExperimentConfig& config, const std::string& checkpoint,
              std::ostream& out) {
  fs::create_directories(config.out_dir);
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);
  const std::string hash = bundle_hash(config.bundle_dir);
  double build_seconds = 0.0;
  const EmbeddingTensor tensor =
      cached_tensor(config, bundle, hash, build_seconds, out);
  const ModelParams params = load_checkpoint(checkpoint);
  out << std::fixed << std::setprecision(4) << "train "
      << evaluate(params, tensor, bundle.labels, bundle.masks.train) << "\nval   "
      << evaluate(params, tensor, bundle.labels, bundle.masks.val) << "\ntest  "
      << evaluate(params, tensor, bundle.labels, bundle.masks.test) << "\n";
}

void cmd_attack(const ExperimentConfig& config, std::ostream& out) {
  fs::create_directories(config.out_dir);
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);
  if (config.attack_budgets.empty()) {
    throw std::runtime_error("attack budgets not given in config");
  }

  std::ofstream csv(config.out_dir + "/attack.csv");
  csv << "mode,T,mean_acc,std_acc\n";
  const char* mode_name =
      config.attack_mode == AttackMode::kEvasion ? "evasion" : "poisoning";
  std::vector<double> means;
  for (int budget : config.attack_budgets) {
    std::vector<double> accs;
    for (int s = 0; s < config.num_seeds; ++s) {
      AttackSpec spec{config.attack_mode, budget, config.attack_insert_external,
                      config.seeds.sampling + 1000 + static_cast<std::uint64_t>(s)};
      accs.push_back(run_attack_experiment(bundle, config, spec,
                                           static_cast<std::uint64_t>(s)));
    }
    const MeanStd stats = mean_std(accs);
    means.push_back(stats.mean);
    csv << mode_name << "," << budget << "," << stats.mean << "," << stats.stddev
        << "\n";
    out << mode_name << " T=" << budget << "  acc " << std::fixed
        << std::setprecision(4) << stats.mean << " +/- " << stats.stddev << "\n";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] > means[i - 1] + 0.005) monotone = false;
  }
  out << "monotone_decreasing " << (monotone ? "yes" : "no") << "\n";
}

void cmd_sweep_p2(const ExperimentConfig& config, const std::vector<int>& p2_values,
                  std::ostream& out) {
  fs::create_directories(config.out_dir);
  if (config.plan.num_hops() < 2) {
    throw std::runtime_error("sweep-p2 needs a plan with K >= 2");
  }
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);

  std::ofstream csv(config.out_dir + "/sweep_p2.csv");
  csv << "P2,mean_acc,std_acc\n";
  for (int p2 : p2_values) {
    ExperimentConfig variant = config;
    variant.plan.layers[1].parents = p2;
    std::vector<double> accs;
    for (int s = 0; s < config.num_seeds; ++s) {
      accs.push_back(
          run_train_once(bundle, variant, static_cast<std::uint64_t>(s))
              .test_accuracy);
    }
    const MeanStd stats = mean_std(accs);
    csv << p2 << "," << stats.mean << "," << stats.stddev << "\n";
    out << "P2=" << p2 << "  acc " << std::fixed << std::setprecision(4)
        << stats.mean << " +/- " << stats.stddev << "\n";
  }
}

void cmd_bench(const ExperimentConfig& config, std::ostream& out) {
  fs::create_directories(config.out_dir);
  const Bundle bundle = load_bundle(config.bundle_dir, config.normalize_features);
  const int n = bundle.graph.num_nodes();

  const MetricsReport base = run_train_once(bundle, config, 0);
  const double agg_once = base.precompute_seconds;
  const double map_total = base.mean_epoch_seconds *
                           static_cast<double>(base.history.size());
  out << std::scientific << std::setprecision(3)
      << "precompute_once_seconds " << agg_once << "\n"
      << "mean_epoch_seconds      " << base.mean_epoch_seconds << "\n"
      << "epochs                  " << base.history.size() << "\n"
      << "training_total_seconds  " << map_total << "\n"
      << "agg_to_map_ratio        " << (map_total > 0 ? agg_once / map_total : 0.0)
      << "\n";

  // Per-node aggregation cost vs sum of S_l * L_l.
  std::ofstream csv(config.out_dir + "/bench.csv");
  csv << "L_scale,sum_SL,per_node_precompute_seconds,mean_epoch_seconds\n";
  for (int scale : {1, 2, 4}) {
    ExperimentConfig variant = config;
    long long sum_sl = 0;
    for (auto& layer : variant.plan.layers) {
      layer.subset *= scale;
      sum_sl += static_cast<long long>(layer.repeats) * layer.subset;
    }
    const auto t0 = std::chrono::steady_clock::now();
    build_embedding_tensor(bundle.graph, bundle.features, variant.plan,
                           config.seeds.sampling, config.threads);
    const double per_node = seconds_since(t0) / static_cast<double>(n);
    ExperimentConfig short_train = variant;
    short_train.train.max_epochs = std::min(config.train.max_epochs, 20);
    short_train.train.patience = short_train.train.max_epochs;
    const MetricsReport r = run_train_once(bundle, short_train, 0);
    csv << scale << "," << sum_sl << "," << per_node << ","
        << r.mean_epoch_seconds << "\n";
    out << "L_scale " << scale << "  sum_SL " << sum_sl
        << "  per_node_agg_s " << per_node << "  epoch_s "
        << r.mean_epoch_seconds << "\n";
  }
}

}  // namespace nrgcn
