#pragma once

// Shortest sequences when every item is acceptable to at most two agents,
// through the generalized problem with per-agent target sets L_i and a
// partition of the agents into groups.

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/solvers/result.hpp"

namespace reform {

/// L_i = {x ∈ M_i : x ⪰_i targets[i]}; `partition` lists disjoint groups
/// covering every agent.
struct GeneralizedInstance {
  Instance base;
  Matching initial;
  std::vector<Item> targets;
  std::vector<std::vector<Agent>> partition;
};

namespace detail {

/// Target thresholds, group membership and the set of agents still in play.
/// Agents outside the active set keep their items but neither envy nor are
/// envied.
struct LNView {
  const Instance* inst = nullptr;
  std::vector<int> threshold;  // rank of x_i
  std::vector<int> group_of;
  std::vector<char> active;
  int num_groups = 0;

  [[nodiscard]] bool in_target(Agent i, Item x) const {
    const int r = inst->rank(i, x);
    return r != kUnranked && r <= threshold[static_cast<std::size_t>(i)];
  }

  [[nodiscard]] std::vector<char> satisfied_groups(const Matching& mu) const {
    std::vector<char> sat(static_cast<std::size_t>(num_groups), 0);
    for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) {
      if (active[static_cast<std::size_t>(i)] && in_target(i, mu[i])) sat[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])] = 1;
    }
    return sat;
  }

  /// First (L,N)-envy pair among active agents, if any.
  [[nodiscard]] std::optional<EnvyPair> find_envy(const Matching& mu, std::span<const Agent> holder) const {
    const auto sat = satisfied_groups(mu);
    for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const int gi = group_of[static_cast<std::size_t>(i)];
      for (Item x : inst->prefs(i)) {
        if (x == mu[i]) break;
        const Agent h = holder[static_cast<std::size_t>(x)];
        if (h == kNoAgent || h == i || !active[static_cast<std::size_t>(h)]) continue;
        if (group_of[static_cast<std::size_t>(h)] == gi || !sat[static_cast<std::size_t>(gi)]) return EnvyPair{i, h};
      }
    }
    return std::nullopt;
  }

  /// Reason the move is not a generalized ⤳ step, or empty when it is.
  [[nodiscard]] std::string move_problem(Matching& mu, std::vector<Agent>& holder, const ExchangeStep& s) const {
    const Agent i = s.agent;
    if (i < 0 || static_cast<std::size_t>(i) >= mu.size()) return "unknown agent";
    if (mu[i] != s.from_item) return "agent does not hold the from-item";
    if (!inst->accepts(i, s.to_item)) return "target item is not acceptable";
    if (holder[static_cast<std::size_t>(s.to_item)] != kNoAgent) return "not unassigned";
    if (!inst->prefers(i, s.to_item, s.from_item)) return "not improving";
    holder[static_cast<std::size_t>(s.from_item)] = kNoAgent;
    holder[static_cast<std::size_t>(s.to_item)] = i;
    mu.assign(i, s.to_item);
    std::string problem;
    if (auto e = find_envy(mu, holder)) {
      problem = "creates envy (" + inst->agent_name(e->first) + "," + inst->agent_name(e->second) + ")";
    }
    mu.assign(i, s.from_item);
    holder[static_cast<std::size_t>(s.to_item)] = kNoAgent;
    holder[static_cast<std::size_t>(s.from_item)] = i;
    return problem;
  }

  [[nodiscard]] std::size_t measure() const {
    std::size_t total = 0;
    for (Agent i = 0; static_cast<std::size_t>(i) < active.size(); ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      total += inst->list_length(i) - static_cast<std::size_t>(threshold[static_cast<std::size_t>(i)] + 1) + 1;
    }
    return total;
  }
};

inline LNView make_view(const GeneralizedInstance& g) {
  const Instance& inst = g.base;
  const std::size_t n = inst.num_agents();
  if (g.targets.size() != n) throw InvalidInput("one target item per agent required");
  if (g.initial.size() != n) throw InvalidInput("initial matching must cover every agent");
  LNView v;
  v.inst = &g.base;
  v.threshold.assign(n, kUnranked);
  v.group_of.assign(n, -1);
  v.active.assign(n, 1);
  v.num_groups = static_cast<int>(g.partition.size());
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    const int r = inst.rank(i, g.targets[static_cast<std::size_t>(i)]);
    if (r == kUnranked) throw InvalidInput("target item of agent " + inst.agent_name(i) + " is not acceptable to her");
    v.threshold[static_cast<std::size_t>(i)] = r;
  }
  for (std::size_t a = 0; a < g.partition.size(); ++a) {
    if (g.partition[a].empty()) throw InvalidInput("partition has an empty group");
    for (Agent i : g.partition[a]) {
      if (i < 0 || static_cast<std::size_t>(i) >= n) throw InvalidInput("partition names an unknown agent");
      if (v.group_of[static_cast<std::size_t>(i)] != -1) throw InvalidInput("partition groups overlap");
      v.group_of[static_cast<std::size_t>(i)] = static_cast<int>(a);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (v.group_of[i] == -1) throw InvalidInput("partition does not cover agent " + inst.agent_name(static_cast<Agent>(i)));
  }
  return v;
}

class LNSolver {
 public:
  LNSolver(const Instance& inst, SolveStats& stats) : inst_(inst), stats_(stats) {}

  /// Steps from `mu` to a matching satisfactory for every active group, or
  /// nullopt when none exists.
  std::optional<std::vector<ExchangeStep>> solve(const LNView& view, const Matching& mu, std::size_t parent_measure,
                                                 std::size_t depth) {
    ++stats_.recursion_calls;
    stats_.max_depth = std::max(stats_.max_depth, depth);
    const std::size_t measure = view.measure();
    stats_.measure_trace.push_back(measure);
    if (measure >= parent_measure) {
      throw InternalError("recursion measure did not decrease (" + std::to_string(parent_measure) + " -> " +
                          std::to_string(measure) + ")");
    }
    const std::size_t n = inst_.num_agents();
    if (std::none_of(view.active.begin(), view.active.end(), [](char c) { return c != 0; })) {
      return std::vector<ExchangeStep>{};
    }

    // A group with a member already inside her target set is done.
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      if (view.active[static_cast<std::size_t>(i)] && view.in_target(i, mu[i])) {
        return solve(drop_group(view, view.group_of[static_cast<std::size_t>(i)]), mu, measure, depth + 1);
      }
    }

    // A single move into some L_i.
    std::vector<Agent> holder = holders_of(inst_.num_items(), mu);
    Matching work = mu;
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      if (!view.active[static_cast<std::size_t>(i)]) continue;
      for (Item x : inst_.prefs(i)) {
        if (!view.in_target(i, x)) break;
        const ExchangeStep step{i, mu[i], x};
        if (!view.move_problem(work, holder, step).empty()) continue;
        auto rest = solve(drop_group(view, view.group_of[static_cast<std::size_t>(i)]), mu.with(i, x), measure, depth + 1);
        if (!rest) return std::nullopt;
        rest->insert(rest->begin(), step);
        return rest;
      }
    }

    return merge_source_component(view, mu, measure, depth);
  }

 private:
  static LNView drop_group(const LNView& view, int group) {
    LNView next = view;
    for (std::size_t i = 0; i < next.active.size(); ++i) {
      if (next.group_of[i] == group) next.active[i] = 0;
    }
    return next;
  }

  /// Source strongly connected component of the group digraph containing the
  /// lowest group id among all source components.
  std::vector<int> source_component(const LNView& view) const {
    const std::size_t k = static_cast<std::size_t>(view.num_groups);
    std::vector<std::vector<char>> reach(k, std::vector<char>(k, 0));
    std::vector<char> live(k, 0);
    const std::size_t n = inst_.num_agents();
    for (std::size_t i = 0; i < n; ++i) {
      if (view.active[i]) live[static_cast<std::size_t>(view.group_of[i])] = 1;
    }
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      if (!view.active[static_cast<std::size_t>(i)]) continue;
      const auto a = static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i)]);
      for (Item x : inst_.prefs(i)) {
        for (Agent j : inst_.acceptors(x)) {
          if (!view.active[static_cast<std::size_t>(j)] || !view.in_target(j, x)) continue;
          const auto b = static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(j)]);
          if (a != b) reach[a][b] = 1;
        }
      }
    }
    for (std::size_t a = 0; a < k; ++a) reach[a][a] = 1;
    for (std::size_t w = 0; w < k; ++w) {
      for (std::size_t a = 0; a < k; ++a) {
        if (!reach[a][w]) continue;
        for (std::size_t b = 0; b < k; ++b) {
          if (reach[w][b]) reach[a][b] = 1;
        }
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (!live[a]) continue;
      std::vector<int> comp;
      bool source = true;
      for (std::size_t b = 0; b < k; ++b) {
        if (!live[b]) continue;
        if (reach[a][b] && reach[b][a]) {
          comp.push_back(static_cast<int>(b));
        } else if (reach[b][a]) {
          source = false;
        }
      }
      if (source) return comp;
    }
    throw InternalError("group digraph has no source component");
  }

  std::optional<std::vector<ExchangeStep>> merge_source_component(const LNView& view, const Matching& mu,
                                                                  std::size_t measure, std::size_t depth) {
    const std::size_t n = inst_.num_agents();
    const std::vector<int> comp = source_component(view);
    std::vector<char> in_s(static_cast<std::size_t>(view.num_groups), 0);
    for (int a : comp) in_s[static_cast<std::size_t>(a)] = 1;
    auto merged = [&](Agent i) {
      return view.active[static_cast<std::size_t>(i)] != 0 &&
             in_s[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i)])] != 0;
    };

    std::vector<char> in_x(inst_.num_items(), 0);
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      if (!merged(i)) continue;
      for (Item x : inst_.prefs(i)) {
        if (!view.in_target(i, x)) break;
        in_x[static_cast<std::size_t>(x)] = 1;
      }
    }
    LNView next = view;
    const int new_group = comp.front();
    bool grew = false;
    std::vector<Item> x_star(n, kNoItem);
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      if (!merged(i)) continue;
      next.group_of[static_cast<std::size_t>(i)] = new_group;
      auto list = inst_.prefs(i);
      for (std::size_t r = list.size(); r-- > 0;) {
        if (in_x[static_cast<std::size_t>(list[r])]) {
          x_star[static_cast<std::size_t>(i)] = list[r];
          if (static_cast<int>(r) > next.threshold[static_cast<std::size_t>(i)]) grew = true;
          next.threshold[static_cast<std::size_t>(i)] = std::max(next.threshold[static_cast<std::size_t>(i)], static_cast<int>(r));
          break;
        }
      }
    }
    // With no target growing, no sequence reaches a satisfactory matching.
    if (!grew) return std::nullopt;

    auto reduced = solve(next, mu, measure, depth + 1);
    if (!reduced) return std::nullopt;
    return expand(view, next, mu, *reduced, in_s, x_star, comp.size());
  }

  /// Turns a sequence for the merged instance into one for `view`.
  std::vector<ExchangeStep> expand(const LNView& view, const LNView& next, const Matching& mu,
                                   const std::vector<ExchangeStep>& reduced, const std::vector<char>& in_s,
                                   const std::vector<Item>& x_star, std::size_t comp_size) const {
    auto merged = [&](Agent i) {
      return view.active[static_cast<std::size_t>(i)] != 0 &&
             in_s[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i)])] != 0;
    };
    std::size_t p = reduced.size();
    for (std::size_t t = 0; t < reduced.size(); ++t) {
      if (merged(reduced[t].agent) && next.in_target(reduced[t].agent, reduced[t].to_item)) {
        p = t;
        break;
      }
    }
    if (p == reduced.size()) throw InternalError("merged group never reaches its target set");

    std::vector<ExchangeStep> out(reduced.begin(), reduced.begin() + static_cast<std::ptrdiff_t>(p) + 1);
    Matching cur = mu;
    for (const auto& s : out) cur.assign(s.agent, s.to_item);
    std::vector<Agent> holder = holders_of(inst_.num_items(), cur);
    auto apply = [&](const ExchangeStep& s) {
      holder[static_cast<std::size_t>(s.from_item)] = kNoAgent;
      holder[static_cast<std::size_t>(s.to_item)] = s.agent;
      cur.assign(s.agent, s.to_item);
      out.push_back(s);
    };

    const Agent i0 = reduced[p].agent;
    const Item x1 = x_star[static_cast<std::size_t>(i0)];
    std::vector<char> sat(static_cast<std::size_t>(view.num_groups), 0);
    Agent i1 = kNoAgent;
    for (Agent j : inst_.acceptors(x1)) {
      if (j != i0 && merged(j) && view.in_target(j, x1)) {
        i1 = j;
        break;
      }
    }
    if (i1 == kNoAgent) throw InternalError("no second acceptor holds x* in her target set");
    {
      const ExchangeStep s{i1, cur[i1], x1};
      if (auto why = view.move_problem(cur, holder, s); !why.empty()) {
        throw InternalError("first intra-component move is infeasible: " + why);
      }
      apply(s);
      sat[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i1)])] = 1;
    }

    for (std::size_t placed = 1; placed < comp_size; ++placed) {
      bool moved = false;
      for (Agent i2 = 0; static_cast<std::size_t>(i2) < cur.size() && !moved; ++i2) {
        if (!merged(i2) || sat[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i2)])]) continue;
        for (Item x2 : inst_.prefs(i2)) {
          if (!view.in_target(i2, x2)) break;
          const bool via_arc = std::ranges::any_of(inst_.acceptors(x2), [&](Agent k) {
            return k != i2 && merged(k) && sat[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(k)])];
          });
          if (!via_arc) continue;
          const ExchangeStep s{i2, cur[i2], x2};
          if (!view.move_problem(cur, holder, s).empty()) continue;
          apply(s);
          sat[static_cast<std::size_t>(view.group_of[static_cast<std::size_t>(i2)])] = 1;
          moved = true;
          break;
        }
      }
      if (!moved) throw InternalError("no feasible arc move inside the merged component");
    }

    for (std::size_t t = p + 1; t < reduced.size(); ++t) {
      if (!merged(reduced[t].agent)) apply(reduced[t]);
    }
    if (out.size() != reduced.size() + comp_size) {
      throw InternalError("expanded sequence has length " + std::to_string(out.size()) + ", expected " +
                          std::to_string(reduced.size() + comp_size));
    }
    return out;
  }

  const Instance& inst_;
  SolveStats& stats_;
};

}  // namespace detail

/// Replays `seq` under the generalized envy notion of `g`. `complete` reports
/// whether the final matching is satisfactory.
inline VerifyReport verify_generalized_sequence(const GeneralizedInstance& g, const ReformSequence& seq) {
  VerifyReport rep;
  const detail::LNView view = detail::make_view(g);
  if (auto p = validate_matching(g.base, seq.initial); !p.empty()) {
    rep.reason = "invalid initial matching: " + p.front();
    return rep;
  }
  Matching cur = seq.initial;
  std::vector<Agent> holder = holders_of(g.base.num_items(), cur);
  if (auto e = view.find_envy(cur, holder)) {
    rep.reason = "initial matching has generalized envy (" + g.base.agent_name(e->first) + "," +
                 g.base.agent_name(e->second) + ")";
    return rep;
  }
  for (std::size_t t = 0; t < seq.steps.size(); ++t) {
    const auto& s = seq.steps[t];
    if (auto why = view.move_problem(cur, holder, s); !why.empty()) {
      rep.failing_step = t;
      rep.reason = why;
      rep.final_matching = cur;
      return rep;
    }
    holder[static_cast<std::size_t>(s.from_item)] = kNoAgent;
    holder[static_cast<std::size_t>(s.to_item)] = s.agent;
    cur.assign(s.agent, s.to_item);
  }
  rep.valid = true;
  rep.final_matching = cur;
  const auto sat = view.satisfied_groups(cur);
  rep.complete = std::all_of(sat.begin(), sat.end(), [](char c) { return c != 0; });
  return rep;
}

/// Exact shortest sequence of generalized-envy-free matchings from the
/// initial matching to a satisfactory one. Every item must have at most two
/// acceptors.
inline SolveResult solve_general_LN(const GeneralizedInstance& g) {
  require_valid(g.base);
  for (Item x = 0; static_cast<std::size_t>(x) < g.base.num_items(); ++x) {
    if (g.base.acceptors(x).size() > 2) {
      throw InvalidInput("item " + g.base.item_name(x) + " is acceptable to " +
                         std::to_string(g.base.acceptors(x).size()) + " agents; at most 2 allowed");
    }
  }
  require_matching(g.base, g.initial, "initial matching");
  const detail::LNView view = detail::make_view(g);
  {
    const auto holder = holders_of(g.base.num_items(), g.initial);
    if (auto e = view.find_envy(g.initial, holder)) {
      throw InvalidInput("initial matching has generalized envy (" + g.base.agent_name(e->first) + "," +
                         g.base.agent_name(e->second) + ")");
    }
  }

  SolveStats stats;
  stats.solver = "two_acceptor";
  detail::LNSolver solver(g.base, stats);
  auto steps = solver.solve(view, g.initial, static_cast<std::size_t>(-1), 0);
  if (!steps) return SolveResult::make_failed(SolveStatus::infeasible, stats);

  ReformSequence seq{g.initial, std::move(*steps), {}};
  const VerifyReport check = verify_generalized_sequence(g, seq);
  if (!check.valid || !check.complete) {
    throw InternalError("reconstructed sequence rejected: " +
                        (check.valid ? std::string("final matching not satisfactory") : check.reason));
  }
  return SolveResult::make_solved(std::move(seq), stats);
}

/// Singleton groups with L_i = {σ(i)} on a preprocessed instance.
inline GeneralizedInstance reformist_as_generalized(const Instance& inst, const Matching& mu, const Matching& sigma) {
  GeneralizedInstance g{inst, mu, {sigma.items().begin(), sigma.items().end()}, {}};
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) g.partition.push_back({i});
  return g;
}

inline SolveResult shortest_two_acceptor(const Instance& inst, const Matching& mu) {
  require_valid(inst);
  const Matching sigma = require_preprocessed(inst, mu);
  SolveResult r = solve_general_LN(reformist_as_generalized(inst, mu, sigma));
  if (r.solved() && r.sequence->final_matching() != sigma) {
    throw InternalError("two-acceptor solver did not end at the reformist matching");
  }
  return r;
}

}  // namespace reform
