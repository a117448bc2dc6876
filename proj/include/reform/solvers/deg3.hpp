#pragma once

// Shortest sequence when every list has at most three items: each agent
// jumps straight from μ(i) to σ(i), in an order given by sink elimination.

#include <string>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/solvers/result.hpp"

namespace reform {

/// Requires a preprocessed instance with m_i ≤ 3. Agent j's middle item b(j)
/// exists only when m_j = 3; D has arc (i,j) iff σ(i) = b(j). The lowest-index
/// sink of D among unmoved agents moves next.
inline SolveResult shortest_deg3(const Instance& inst, const Matching& mu) {
  require_valid(inst);
  const std::size_t n = inst.num_agents();
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    if (inst.list_length(i) > 3) {
      throw InvalidInput("agent " + inst.agent_name(i) + " has " + std::to_string(inst.list_length(i)) +
                         " acceptable items; at most 3 allowed");
    }
  }
  const Matching sigma = require_preprocessed(inst, mu);

  std::vector<std::vector<Agent>> out_arcs(n);
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    for (Agent j = 0; static_cast<std::size_t>(j) < n; ++j) {
      if (i != j && inst.list_length(j) == 3 && inst.prefs(j)[1] == sigma[i]) {
        out_arcs[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }

  SolveStats stats;
  stats.solver = "deg3";
  ReformSequence seq{mu, {}, {}};
  Matching cur = mu;
  std::vector<Agent> holder = holders_of(inst.num_items(), cur);
  std::vector<char> moved(n, 0);
  for (std::size_t round = 0; round < n; ++round) {
    Agent sink = kNoAgent;
    for (Agent i = 0; static_cast<std::size_t>(i) < n && sink == kNoAgent; ++i) {
      if (moved[static_cast<std::size_t>(i)]) continue;
      bool has_out = false;
      for (Agent j : out_arcs[static_cast<std::size_t>(i)]) has_out = has_out || !moved[static_cast<std::size_t>(j)];
      if (!has_out) sink = i;
    }
    if (sink == kNoAgent) throw InternalError("agent digraph has a directed cycle");
    ++stats.nodes;
    const ExchangeStep step{sink, cur[sink], sigma[sink]};
    if (auto v = check_exchange(inst, cur, holder, step)) {
      throw InternalError("sink move of agent " + inst.agent_name(sink) + " is infeasible: " + describe(inst, *v));
    }
    holder[static_cast<std::size_t>(step.from_item)] = kNoAgent;
    holder[static_cast<std::size_t>(step.to_item)] = sink;
    cur.assign(sink, step.to_item);
    moved[static_cast<std::size_t>(sink)] = 1;
    seq.steps.push_back(step);
  }
  stats.max_depth = seq.length();
  return SolveResult::make_solved(std::move(seq), stats);
}

}  // namespace reform
