#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "nrgcn/graph.hpp"

using namespace nrgcn;
namespace fs = std::filesystem;

namespace {

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

std::vector<int> to_vec(std::span<const int> s) { return {s.begin(), s.end()}; }

fs::path make_tmpdir(const char* tag) {
  auto dir = fs::temp_directory_path() / (std::string("nrgcn_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Minimal hand-rolled bundle on disk.
fs::path write_path3_bundle(const char* tag) {
  auto dir = make_tmpdir(tag);
  write_text(dir / "meta.json",
             R"({"num_nodes": 3, "feature_dim": 2, "num_classes": 2})");
  write_text(dir / "edges.txt", "0 1\n1 2\n");
  {
    std::ofstream out(dir / "features.bin", std::ios::binary);
    const float rows[6] = {2.f, 2.f, 1.f, 3.f, 0.f, 0.f};
    out.write(reinterpret_cast<const char*>(rows), sizeof(rows));
  }
  write_text(dir / "labels.txt", "0\n1\n0\n");
  write_text(dir / "splits.json", R"({"train": [0], "val": [1], "test": [2]})");
  return dir;
}

}  // namespace

TEST_CASE("neighbors on small graphs") {
  const Graph path = path_graph(3);
  CHECK(to_vec(path.neighbors(1)) == std::vector<int>{0, 2});

  const Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(to_vec(star.neighbors(0)) == std::vector<int>{1, 2, 3, 4});

  const Graph with_isolate = Graph::from_edges(3, {{0, 1}});
  CHECK(with_isolate.neighbors(2).empty());
}

TEST_CASE("from_edges symmetrizes, dedups, drops self-loops") {
  const Graph g = Graph::from_edges(3, {{1, 0}, {0, 1}, {1, 1}, {2, 1}});
  CHECK(g.num_edges() == 2);
  CHECK(to_vec(g.neighbors(1)) == std::vector<int>{0, 2});
  CHECK(to_vec(g.neighbors(0)) == std::vector<int>{1});
  for (int v = 0; v < 3; ++v) {
    for (int u : g.neighbors(v)) CHECK(g.has_edge(u, v));
  }
}

TEST_CASE("khop_frontier basics") {
  const Graph path = path_graph(4);
  CHECK(khop_frontier(path, 2, 0).members == std::vector<int>{2});
  CHECK(khop_frontier(path, 0, 2).members == std::vector<int>{2});
  CHECK(khop_frontier(path, 0, 3).members == std::vector<int>{3});
  CHECK(khop_frontier(path, 0, 5).members.empty());
}

TEST_CASE("khop_frontier agrees with Floyd-Warshall oracle") {
  RandomSource rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = testing::random_graph(50, 0.08, rng);
    const auto dist = testing::floyd_warshall(g);
    for (int v = 0; v < g.num_nodes(); v += 7) {
      for (int l = 0; l <= 3; ++l) {
        std::vector<int> expected;
        for (int u = 0; u < g.num_nodes(); ++u) {
          if (dist[v][u] == l) expected.push_back(u);
        }
        CHECK(khop_frontier(g, v, l).members == expected);
      }
    }
  }
}

TEST_CASE("frontiers partition the reachable ball") {
  RandomSource rng(11);
  const Graph g = testing::random_graph(60, 0.06, rng);
  const int root = 4;
  std::vector<char> seen(60, 0);
  int total = 0;
  for (int l = 0; l <= 4; ++l) {
    for (int u : khop_frontier(g, root, l).members) {
      CHECK(!seen[u]);
      seen[u] = 1;
      ++total;
    }
  }
  const auto dist = bfs_distances(g, root, 4);
  int reachable = 0;
  for (int u = 0; u < 60; ++u) {
    if (dist[u] >= 0 && dist[u] <= 4) ++reachable;
  }
  CHECK(total == reachable);
}

TEST_CASE("row_normalize") {
  FeatureMatrix m(3, 3);
  m << 2, 2, 0, 0, 0, 0, 1, 3, 0;
  row_normalize(m);
  CHECK(m(0, 0) == doctest::Approx(0.5));
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m.row(1).sum() == 0.0f);
  CHECK(m(2, 0) == doctest::Approx(0.25));
  CHECK(m(2, 1) == doctest::Approx(0.75));
}

TEST_CASE("load_bundle on a 3-node path") {
  const auto dir = write_path3_bundle("path3");
  const Bundle b = load_bundle(dir.string());
  CHECK(b.graph.num_nodes() == 3);
  CHECK(to_vec(b.graph.neighbors(1)) == std::vector<int>{0, 2});
  CHECK(b.labels.num_classes == 2);
  // row-normalized by default
  CHECK(b.features(0, 0) == doctest::Approx(0.5));
  CHECK(b.features(1, 1) == doctest::Approx(0.75));
  CHECK(b.features.row(2).sum() == 0.0f);
  const Bundle raw = load_bundle(dir.string(), /*normalize_features=*/false);
  CHECK(raw.features(0, 0) == 2.0f);
}

TEST_CASE("load_bundle error reporting") {
  SUBCASE("edge endpoint out of range") {
    auto dir = make_tmpdir("bad_edge");
    write_text(dir / "meta.json",
               R"({"num_nodes": 4, "feature_dim": 1, "num_classes": 2})");
    write_text(dir / "edges.txt", "0 1\n5 9\n");
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("edges.txt:2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("node ID out of range"),
                         std::runtime_error);
  }
  SUBCASE("missing file") {
    auto dir = make_tmpdir("missing");
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("missing file"), std::runtime_error);
  }
  SUBCASE("label out of range") {
    auto dir = write_path3_bundle("bad_label");
    write_text(dir / "labels.txt", "0\n7\n0\n");
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("labels.txt:2"), std::runtime_error);
  }
  SUBCASE("malformed edge line") {
    auto dir = write_path3_bundle("bad_line");
    write_text(dir / "edges.txt", "0 x\n");
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("malformed line"), std::runtime_error);
  }
  SUBCASE("overlapping splits") {
    auto dir = write_path3_bundle("bad_split");
    write_text(dir / "splits.json", R"({"train": [0], "val": [0], "test": []})");
    CHECK_THROWS_WITH_AS(load_bundle(dir.string()),
                         doctest::Contains("disjoint"), std::runtime_error);
  }
}

TEST_CASE("bundle save/load round-trips bit-exactly") {
  RandomSource rng(3);
  const Bundle original = testing::random_bundle(40, 6, 3, 0.1, rng);
  const auto dir = make_tmpdir("roundtrip");
  save_bundle(original, dir.string());
  const Bundle loaded = load_bundle(dir.string(), /*normalize_features=*/false);

  CHECK(loaded.graph.num_nodes() == original.graph.num_nodes());
  CHECK(loaded.graph.edge_list() == original.graph.edge_list());
  CHECK((loaded.features.array() == original.features.array()).all());  // bit-exact
  CHECK(loaded.labels.values == original.labels.values);
  CHECK(loaded.masks.train == original.masks.train);
  CHECK(loaded.masks.val == original.masks.val);
  CHECK(loaded.masks.test == original.masks.test);
}

TEST_CASE("bundle_hash changes when any file changes") {
  const auto dir = write_path3_bundle("hash");
  const std::string h0 = bundle_hash(dir.string());
  CHECK(h0.size() == 32);
  CHECK(bundle_hash(dir.string()) == h0);
  write_text(dir / "edges.txt", "0 1\n");
  CHECK(bundle_hash(dir.string()) != h0);
}
