#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nrgcn {

// Dense row-major float matrix, one row per node.
using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Immutable undirected graph in CSR form. Neighbor lists are sorted,
// duplicate-free, self-loop-free; adjacency is symmetric by construction.
class Graph {
 public:
  Graph() = default;

  // Symmetrizes, deduplicates and drops self-loops. Throws on an
  // out-of-range endpoint.
  static Graph from_edges(int num_nodes,
                          const std::vector<std::pair<int, int>>& edges);

  int num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const {
    return static_cast<std::int64_t>(adj_.size()) / 2;
  }

  std::span<const int> neighbors(int v) const {
    return {adj_.data() + offsets_[v],
            adj_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
  }

  int degree(int v) const {
    return offsets_[static_cast<std::size_t>(v) + 1] - offsets_[v];
  }

  bool has_edge(int u, int v) const;

  // Undirected edge list with u < v, sorted.
  std::vector<std::pair<int, int>> edge_list() const;

 private:
  int num_nodes_ = 0;
  std::vector<int> offsets_;  // size num_nodes_ + 1
  std::vector<int> adj_;
};

struct Labels {
  std::vector<int> values;
  int num_classes = 0;
};

struct SplitMasks {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

struct Bundle {
  Graph graph;
  FeatureMatrix features;
  Labels labels;
  SplitMasks masks;
};

struct KHopFrontier {
  int root = 0;
  int hop = 0;
  std::vector<int> members;  // sorted
};

// BFS distances from root, capped at max_hop (-1 beyond the cap /
// unreachable).
std::vector<int> bfs_distances(const Graph& g, int root, int max_hop);

// Nodes at shortest-path distance exactly l from v.
KHopFrontier khop_frontier(const Graph& g, int v, int l);

// Scales each nonzero row to sum 1; zero rows stay zero.
void row_normalize(FeatureMatrix& features);

// Bundle directory I/O. load_bundle validates every invariant and throws
// std::runtime_error naming the offending file and line.
Bundle load_bundle(const std::string& dir, bool normalize_features = true);
void save_bundle(const Bundle& bundle, const std::string& dir);

// 128-bit content hash over the five bundle files, 32 hex chars.
std::string bundle_hash(const std::string& dir);

}  // namespace nrgcn
