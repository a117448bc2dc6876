#pragma once

// Exhaustive breadth-first search over envy-free matchings. Used as the
// reference answer for every other solver.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <unordered_map>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/solvers/result.hpp"

namespace reform {

inline constexpr std::size_t kDefaultBfsBudget = 2'000'000;

/// Minimum number of ⤳ steps from μ to its reformist matching. Neighbours are
/// expanded in feasible_exchanges order and the first parent found is kept,
/// so the returned path is the lexicographically smallest shortest one.
/// Stops with budget_exhausted once more than `max_states` matchings have
/// been discovered.
inline SolveResult bfs_shortest(const Instance& inst, const Matching& mu, std::size_t max_states = kDefaultBfsBudget) {
  const Matching sigma = reformist_matching(inst, mu);
  SolveStats stats;
  stats.solver = "bfs";

  struct Node {
    std::size_t parent;
    ExchangeStep step;
    std::size_t depth;
  };
  std::vector<Matching> states{mu};
  std::vector<Node> nodes{{0, {}, 0}};
  std::unordered_map<Matching, std::size_t, MatchingHash> seen{{mu, 0}};
  std::deque<std::size_t> queue{0};

  auto path_to = [&](std::size_t v) {
    ReformSequence seq{mu, {}, {}};
    for (; v != 0; v = nodes[v].parent) seq.steps.push_back(nodes[v].step);
    std::reverse(seq.steps.begin(), seq.steps.end());
    return seq;
  };

  if (mu == sigma) return SolveResult::make_solved(path_to(0), stats);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    ++stats.nodes;
    const Matching cur = states[v];
    const auto holder = holders_of(inst.num_items(), cur);
    for (const auto& step : feasible_exchanges_unchecked(inst, cur, holder)) {
      Matching next = cur.with(step.agent, step.to_item);
      if (seen.contains(next)) continue;
      const std::size_t id = states.size();
      seen.emplace(next, id);
      nodes.push_back({v, step, nodes[v].depth + 1});
      stats.max_depth = std::max(stats.max_depth, nodes[id].depth);
      if (next == sigma) {
        states.push_back(std::move(next));
        return SolveResult::make_solved(path_to(id), stats);
      }
      states.push_back(std::move(next));
      if (states.size() > max_states) return SolveResult::make_failed(SolveStatus::budget_exhausted, stats);
      queue.push_back(id);
    }
  }
  // σ is always reachable; getting here means the engine and the search disagree.
  throw InternalError("breadth-first search exhausted without reaching the reformist matching");
}

}  // namespace reform
