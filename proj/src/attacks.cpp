#include "nrgcn/attacks.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace nrgcn {

namespace {

std::pair<int, int> ordered(int u, int v) {
  return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
}

}  // namespace

AttackResult apply_dice(const Graph& g, const Labels& labels,
                        const SplitMasks& masks, const AttackSpec& spec,
                        RandomSource& rng) {
  std::vector<int> targets =
      spec.mode == AttackMode::kEvasion ? masks.test : masks.train;
  rng.shuffle(targets);

  std::set<std::pair<int, int>> removed;
  std::set<std::pair<int, int>> added;
  std::vector<GraphEdit> edits;

  for (int v : targets) {
    const int y = labels.values[static_cast<std::size_t>(v)];

    std::vector<int> same_class;
    for (int u : g.neighbors(v)) {
      if (labels.values[static_cast<std::size_t>(u)] == y &&
          !removed.contains(ordered(u, v))) {
        same_class.push_back(u);
      }
    }
    for (int u : rng.sample_without_replacement(
             std::move(same_class), static_cast<std::size_t>(spec.budget),
             /*sort_result=*/false)) {
      removed.insert(ordered(u, v));
      edits.push_back({false, v, u});
    }

    if (spec.insert_external) {
      int inserted = 0;
      // Rejection-sample different-class non-neighbors.
      const int n = g.num_nodes();
      int attempts = 0;
      while (inserted < spec.budget && attempts < 50 * (spec.budget + 1)) {
        ++attempts;
        const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (u == v || labels.values[static_cast<std::size_t>(u)] == y) continue;
        if (g.has_edge(v, u) || added.contains(ordered(u, v))) continue;
        added.insert(ordered(u, v));
        edits.push_back({true, v, u});
        ++inserted;
      }
    }
  }

  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g.edge_list()) {
    if (!removed.contains(e)) edges.push_back(e);
  }
  edges.insert(edges.end(), added.begin(), added.end());

  return {Graph::from_edges(g.num_nodes(), edges), std::move(edits)};
}

std::string format_edit_log(const std::vector<GraphEdit>& edits) {
  std::ostringstream os;
  for (const auto& e : edits) {
    os << (e.added ? "ADD " : "DEL ") << e.u << " " << e.v << "\n";
  }
  return os.str();
}

}  // namespace nrgcn
