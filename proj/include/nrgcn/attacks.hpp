#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrgcn/graph.hpp"
#include "nrgcn/rng.hpp"

namespace nrgcn {

enum class AttackMode { kEvasion, kPoisoning };

// DICE-style structural attack: per-target-node budget of same-class
// edge deletions, optional cross-class insertions.
struct AttackSpec {
  AttackMode mode = AttackMode::kEvasion;
  int budget = 0;  // T
  bool insert_external = false;
  std::uint64_t seed = 0;
};

struct GraphEdit {
  bool added = false;  // false: deletion
  int u = 0;
  int v = 0;
};

struct AttackResult {
  Graph graph;
  std::vector<GraphEdit> edits;
};

// Removes up to T same-class 1-hop edges per target node (test mask under
// evasion, train mask under poisoning), processed in shuffled order; each
// physical edge counts once. With insert_external, also adds T edges to
// random different-class non-neighbors per node.
AttackResult apply_dice(const Graph& g, const Labels& labels,
                        const SplitMasks& masks, const AttackSpec& spec,
                        RandomSource& rng);

// "DEL u v" / "ADD u v", one line per edit.
std::string format_edit_log(const std::vector<GraphEdit>& edits);

}  // namespace nrgcn
