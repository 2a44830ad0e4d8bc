#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "nrgcn/experiment.hpp"

using namespace nrgcn;
namespace fs = std::filesystem;

namespace {

// Synthetic bundle on disk plus a matching config.
struct Fixture {
  fs::path dir;
  ExperimentConfig config;

  explicit Fixture(const char* tag, int nodes_per_cluster = 12) {
    dir = fs::temp_directory_path() / (std::string("nrgcn_exp_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir / "bundle");
    fs::create_directories(dir / "out");
    RandomSource rng(7);
    const Bundle b = testing::two_cluster_bundle(nodes_per_cluster, rng);
    save_bundle(b, (dir / "bundle").string());

    config.bundle_dir = (dir / "bundle").string();
    config.plan = SamplingPlan{{{1, 2, 2}, {2, 2, 2}}};
    config.hidden = 8;
    config.num_seeds = 2;
    config.train.batch_size = 8;
    config.train.max_epochs = 10;
    config.train.patience = 10;
    config.out_dir = (dir / "out").string();
  }
};

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

}  // namespace

TEST_CASE("config JSON round-trip") {
  Fixture fx("config");
  fx.config.attack_budgets = {1, 2};
  fx.config.attack_mode = AttackMode::kPoisoning;
  const auto j = fx.config.to_json();
  const auto back = ExperimentConfig::from_json(j);
  CHECK(back.bundle_dir == fx.config.bundle_dir);
  CHECK(plans_equal(back.plan, fx.config.plan));
  CHECK(back.hidden == fx.config.hidden);
  CHECK(back.num_seeds == fx.config.num_seeds);
  CHECK(back.train.max_epochs == fx.config.train.max_epochs);
  CHECK(back.attack_budgets == fx.config.attack_budgets);
  CHECK(back.attack_mode == AttackMode::kPoisoning);
  CHECK(back.seeds.sampling == fx.config.seeds.sampling);
}

TEST_CASE("cmd_precompute caches and reuses") {
  Fixture fx("precompute");
  std::ostringstream out1;
  cmd_precompute(fx.config, out1);
  CHECK(fs::exists(fs::path(fx.config.out_dir) / "embeddings.nrgc"));
  CHECK(out1.str().find("embedding tensor 24 x 5 x 4") != std::string::npos);

  // second run is a cache hit: zero build seconds
  std::ostringstream out2;
  cmd_precompute(fx.config, out2);
  CHECK(out2.str().find("build_seconds 0\n") != std::string::npos);

  SUBCASE("corrupt cache triggers rebuild with a warning") {
    std::ofstream(fs::path(fx.config.out_dir) / "embeddings.nrgc",
                  std::ios::binary)
        << "garbage";
    std::ostringstream out3;
    cmd_precompute(fx.config, out3);
    CHECK(out3.str().find("warning:") != std::string::npos);
    CHECK(out3.str().find("embedding tensor 24 x 5 x 4") != std::string::npos);
  }
  SUBCASE("changed bundle triggers rebuild") {
    // append an edge
    std::ofstream edges(fs::path(fx.config.bundle_dir) / "edges.txt",
                        std::ios::app);
    edges << "0 23\n";
    edges.close();
    std::ostringstream out3;
    cmd_precompute(fx.config, out3);
    CHECK(out3.str().find("warning: stale cache") != std::string::npos);
  }
}

TEST_CASE("cmd_train writes history, checkpoints and summary") {
  Fixture fx("train");
  std::ostringstream out;
  cmd_train(fx.config, out);
  for (int s = 0; s < fx.config.num_seeds; ++s) {
    const auto hist =
        fs::path(fx.config.out_dir) / ("history_seed" + std::to_string(s) + ".csv");
    REQUIRE(fs::exists(hist));
    std::ifstream in(hist);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch,train_loss,val_acc,test_acc,epoch_seconds");
    CHECK(fs::exists(fs::path(fx.config.out_dir) /
                     ("checkpoint_seed" + std::to_string(s) + ".nrgm")));
    CHECK(fs::exists(fs::path(fx.config.out_dir) /
                     ("report_seed" + std::to_string(s) + ".json")));
  }
  // one row per epoch plus header
  CHECK(count_lines(fs::path(fx.config.out_dir) / "history_seed0.csv") ==
        fx.config.train.max_epochs + 1);
  CHECK(fs::exists(fs::path(fx.config.out_dir) / "summary.csv"));
  CHECK(out.str().find("test mean") != std::string::npos);
}

TEST_CASE("reports are reproducible for fixed seeds") {
  Fixture fx("repro");
  const Bundle b = load_bundle(fx.config.bundle_dir);
  const auto r1 = run_train_once(b, fx.config, 0);
  const auto r2 = run_train_once(b, fx.config, 0);
  CHECK(r1.test_accuracy == r2.test_accuracy);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
  }
  // the report embeds config and seeds for replay
  CHECK(r1.config_echo.at("bundle") == fx.config.bundle_dir);
  CHECK(r1.seeds.sampling == fx.config.seeds.sampling);
}

TEST_CASE("cmd_eval scores a saved checkpoint") {
  Fixture fx("eval");
  std::ostringstream out;
  cmd_train(fx.config, out);
  std::ostringstream eval_out;
  cmd_eval(fx.config,
           (fs::path(fx.config.out_dir) / "checkpoint_seed0.nrgm").string(),
           eval_out);
  CHECK(eval_out.str().find("test") != std::string::npos);
}

TEST_CASE("cmd_attack emits one row per budget") {
  Fixture fx("attack");
  fx.config.num_seeds = 1;
  fx.config.train.max_epochs = 5;
  fx.config.train.patience = 5;
  fx.config.attack_budgets = {0, 1};
  std::ostringstream out;
  cmd_attack(fx.config, out);
  CHECK(count_lines(fs::path(fx.config.out_dir) / "attack.csv") == 3);
  CHECK(out.str().find("evasion T=0") != std::string::npos);
  CHECK(out.str().find("monotone_decreasing") != std::string::npos);
}

TEST_CASE("cmd_sweep_p2 emits one row per value") {
  Fixture fx("sweep");
  fx.config.num_seeds = 1;
  fx.config.train.max_epochs = 5;
  fx.config.train.patience = 5;
  std::ostringstream out;
  cmd_sweep_p2(fx.config, {1, 2}, out);
  CHECK(count_lines(fs::path(fx.config.out_dir) / "sweep_p2.csv") == 3);
  CHECK(out.str().find("P2=1") != std::string::npos);
  CHECK(out.str().find("P2=2") != std::string::npos);
}

TEST_CASE("cmd_bench smoke on a 100-node synthetic graph") {
  const auto dir = fs::temp_directory_path() / "nrgcn_exp_bench";
  fs::remove_all(dir);
  fs::create_directories(dir / "bundle");
  fs::create_directories(dir / "out");
  RandomSource rng(3);
  const Bundle b = testing::random_bundle(100, 8, 3, 0.05, rng);
  save_bundle(b, (dir / "bundle").string());

  ExperimentConfig config;
  config.bundle_dir = (dir / "bundle").string();
  config.plan = SamplingPlan{{{1, 2, 2}, {2, 2, 3}}};
  config.hidden = 8;
  config.num_seeds = 1;
  config.train.batch_size = 16;
  config.train.max_epochs = 5;
  config.train.patience = 5;
  config.out_dir = (dir / "out").string();

  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out;
  cmd_bench(config, out);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(elapsed < 10.0);
  CHECK(out.str().find("precompute_once_seconds") != std::string::npos);
  CHECK(count_lines(fs::path(config.out_dir) / "bench.csv") == 4);
}
