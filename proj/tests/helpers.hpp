#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "nrgcn/graph.hpp"
#include "nrgcn/rng.hpp"

namespace nrgcn::testing {

// Erdos-Renyi graph with expected degree ~ n * p.
inline Graph random_graph(int n, double p, RandomSource& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.next_unit() < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

// All-pairs shortest paths, O(n^3). Independent oracle for the BFS paths.
inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const int n = g.num_nodes();
  constexpr int kInf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (int u : g.neighbors(v)) d[v][u] = 1;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  for (auto& row : d) {
    for (auto& x : row) {
      if (x >= kInf) x = -1;
    }
  }
  return d;
}

// Two noisy clusters with intra-cluster edges: linearly separable node
// classification task.
inline Bundle two_cluster_bundle(int nodes_per_cluster, RandomSource& rng) {
  const int n = 2 * nodes_per_cluster;
  std::vector<std::pair<int, int>> edges;
  for (int c = 0; c < 2; ++c) {
    const int base = c * nodes_per_cluster;
    for (int i = 0; i < nodes_per_cluster; ++i) {
      for (int j = i + 1; j < nodes_per_cluster; ++j) {
        if (rng.next_unit() < 0.6) edges.emplace_back(base + i, base + j);
      }
    }
  }
  // sparse cross links
  for (int i = 0; i < nodes_per_cluster / 4; ++i) {
    edges.emplace_back(static_cast<int>(rng.next_below(nodes_per_cluster)),
                       nodes_per_cluster +
                           static_cast<int>(rng.next_below(nodes_per_cluster)));
  }

  Bundle b;
  b.graph = Graph::from_edges(n, edges);
  b.features.resize(n, 4);
  for (int v = 0; v < n; ++v) {
    const int c = v < nodes_per_cluster ? 0 : 1;
    for (int f = 0; f < 4; ++f) {
      const double base = (f % 2 == c) ? 1.0 : 0.1;
      b.features(v, f) = static_cast<float>(base + 0.1 * rng.next_unit());
    }
    b.labels.values.push_back(c);
  }
  b.labels.num_classes = 2;

  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
  rng.shuffle(order);
  for (int i = 0; i < n; ++i) {
    if (i < n / 2) {
      b.masks.train.push_back(order[static_cast<std::size_t>(i)]);
    } else if (i < 3 * n / 4) {
      b.masks.val.push_back(order[static_cast<std::size_t>(i)]);
    } else {
      b.masks.test.push_back(order[static_cast<std::size_t>(i)]);
    }
  }
  return b;
}

// Random labels + random features on a random graph, for attack audits.
inline Bundle random_bundle(int n, int dim, int classes, double p,
                            RandomSource& rng) {
  Bundle b;
  b.graph = random_graph(n, p, rng);
  b.features.resize(n, dim);
  for (int v = 0; v < n; ++v) {
    for (int f = 0; f < dim; ++f) {
      b.features(v, f) = static_cast<float>(rng.next_unit());
    }
    b.labels.values.push_back(static_cast<int>(rng.next_below(classes)));
  }
  b.labels.num_classes = classes;
  for (int v = 0; v < n; ++v) {
    if (v % 3 == 0) {
      b.masks.train.push_back(v);
    } else if (v % 3 == 1) {
      b.masks.val.push_back(v);
    } else {
      b.masks.test.push_back(v);
    }
  }
  return b;
}

}  // namespace nrgcn::testing
