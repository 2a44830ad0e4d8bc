#include "nrgcn/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace nrgcn {

int SamplingPlan::total_slots() const {
  int slots = 1;
  for (const auto& layer : layers) slots += layer.repeats;
  return slots;
}

int SamplingPlan::slot_index(int hop, int repeat) const {
  if (hop == 0) return 0;
  int idx = 1;
  for (int l = 1; l < hop; ++l) idx += layers[static_cast<std::size_t>(l) - 1].repeats;
  return idx + repeat;
}

void SamplingPlan::validate() const {
  if (layers.empty()) throw std::invalid_argument("sampling plan needs K >= 1");
  if (layers.front().parents != 1) {
    throw std::invalid_argument("P_1 must be 1 (parent set is the root)");
  }
  for (const auto& layer : layers) {
    if (layer.parents < 1 || layer.repeats < 1 || layer.subset < 1) {
      throw std::invalid_argument("plan entries P, S, L must all be >= 1");
    }
  }
}

std::vector<int> sample_parents(const Graph& g, const std::vector<int>& frontier,
                                int hop, const SamplingPlan& plan,
                                RandomSource& rng) {
  (void)g;
  if (hop == 1) return frontier;  // caller passes {root} as the hop-0 frontier
  const auto p = static_cast<std::size_t>(
      plan.layers[static_cast<std::size_t>(hop) - 1].parents);
  return rng.sample_without_replacement(frontier, p);
}

std::vector<int> localized_node_set(const Graph& g,
                                    const std::vector<int>& parents, int root) {
  std::vector<int> members;
  for (int p : parents) {
    const auto nb = g.neighbors(p);
    members.insert(members.end(), nb.begin(), nb.end());
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  const auto it = std::lower_bound(members.begin(), members.end(), root);
  if (it != members.end() && *it == root) members.erase(it);
  return members;
}

std::vector<int> sample_layer(const Graph& g, int root, int hop,
                              const SamplingPlan& plan,
                              const std::vector<int>& frontier,
                              const std::vector<int>& dist, RandomSource& rng) {
  const auto parents = sample_parents(g, frontier, hop, plan, rng);
  auto pool = localized_node_set(g, parents, root);
  if (plan.exact_hop_filter) {
    std::erase_if(pool, [&](int u) { return dist[u] != hop; });
  }
  const auto l = static_cast<std::size_t>(
      plan.layers[static_cast<std::size_t>(hop) - 1].subset);
  return rng.sample_without_replacement(std::move(pool), l);
}

SampleSet multi_sample(const Graph& g, int root, const SamplingPlan& plan,
                       RandomSource& rng) {
  const int k = plan.num_hops();
  const auto dist = bfs_distances(g, root, k);

  std::vector<std::vector<int>> frontiers(static_cast<std::size_t>(k));
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (dist[u] >= 0 && dist[u] < k) frontiers[dist[u]].push_back(u);
  }

  SampleSet set;
  set.root = root;
  set.subsets.reserve(static_cast<std::size_t>(plan.total_slots()));
  set.subsets.push_back({root});
  for (int hop = 1; hop <= k; ++hop) {
    const int repeats = plan.layers[static_cast<std::size_t>(hop) - 1].repeats;
    for (int i = 0; i < repeats; ++i) {
      set.subsets.push_back(sample_layer(g, root, hop, plan,
                                         frontiers[static_cast<std::size_t>(hop) - 1],
                                         dist, rng));
    }
  }
  return set;
}

}  // namespace nrgcn
