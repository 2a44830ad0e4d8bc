#pragma once

#include <cstdint>
#include <vector>

#include "nrgcn/graph.hpp"
#include "nrgcn/rng.hpp"

namespace nrgcn {

// Per-layer sampling parameters. Layer l = 1..K; hop 0 is implicit.
struct SamplingPlan {
  struct Layer {
    int parents = 1;  // P_l
    int repeats = 1;  // S_l
    int subset = 1;   // L_l
  };

  std::vector<Layer> layers;

  // When set, localized node sets are intersected with the exact l-hop
  // frontier before drawing (default off: Definition-1 raw union).
  bool exact_hop_filter = false;

  int num_hops() const { return static_cast<int>(layers.size()); }

  // Slots per node: 1 + sum of repeats.
  int total_slots() const;

  // Position of subset (hop l, repeat i), i in [0, S_l). Hop 0 is slot 0.
  int slot_index(int hop, int repeat) const;

  // Throws on invalid parameters (P_1 must be 1, all entries >= 1).
  void validate() const;
};

// The sampled subsets for one root, in slot order. subsets[0] == {root}.
struct SampleSet {
  int root = 0;
  std::vector<std::vector<int>> subsets;

  const std::vector<int>& subset(const SamplingPlan& plan, int hop,
                                 int repeat) const {
    return subsets[plan.slot_index(hop, repeat)];
  }
};

// Parent draw for hop l: uniform without replacement from the exact
// (l-1)-hop frontier, clamped; [root] for l = 1.
std::vector<int> sample_parents(const Graph& g, const std::vector<int>& frontier,
                                int hop, const SamplingPlan& plan,
                                RandomSource& rng);

// Union of the parents' 1-hop neighbor sets, root excluded, sorted.
std::vector<int> localized_node_set(const Graph& g,
                                    const std::vector<int>& parents, int root);

// One (parents -> localized set -> L_l subset) draw, sorted result.
std::vector<int> sample_layer(const Graph& g, int root, int hop,
                              const SamplingPlan& plan,
                              const std::vector<int>& frontier,
                              const std::vector<int>& dist, RandomSource& rng);

// Full S_v: hop-0 singleton plus S_l independent draws per hop.
SampleSet multi_sample(const Graph& g, int root, const SamplingPlan& plan,
                       RandomSource& rng);

}  // namespace nrgcn
