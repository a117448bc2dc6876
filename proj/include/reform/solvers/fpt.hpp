#pragma once

// Branching algorithms parameterized by the sequence length ℓ and by the
// number |K| of intermediate items.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/solvers/result.hpp"

namespace reform {

/// n^ℓ, saturating at SIZE_MAX.
inline std::size_t saturating_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t e = 0; e < exp; ++e) {
    if (base != 0 && out > std::numeric_limits<std::size_t>::max() / base) return std::numeric_limits<std::size_t>::max();
    out *= base;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter ℓ
// ---------------------------------------------------------------------------

/// Decides whether a reformist sequence of length at most `max_length` exists
/// and returns a shortest one if so. Requires a preprocessed instance. Each
/// branch nominates one agent and moves her to her best feasible item; states
/// that already failed with at least the current remaining budget are cut.
/// `max_nodes` = 0 means unlimited.
inline SolveResult fpt_by_length(const Instance& inst, const Matching& mu, std::size_t max_length,
                                 std::size_t max_nodes = 0) {
  require_valid(inst);
  const Matching sigma = require_preprocessed(inst, mu);
  const std::size_t n = inst.num_agents();
  SolveStats stats;
  stats.solver = "fpt_length";
  if (n > max_length) return SolveResult::make_failed(SolveStatus::infeasible, stats);

  std::unordered_map<Matching, std::size_t, MatchingHash> failed;  // state -> largest failed budget
  std::vector<ExchangeStep> path;
  std::optional<std::vector<ExchangeStep>> best;
  bool out_of_nodes = false;

  auto unfinished = [&](const Matching& cur) {
    std::size_t c = 0;
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) c += cur[i] != sigma[i];
    return c;
  };

  // True when a sequence was found below this node. A node that returns
  // false saw no change of `best` while it was explored, so its budget is
  // exact and safe to memoize.
  std::function<bool(Matching&, std::vector<Agent>&)> dfs = [&](Matching& cur, std::vector<Agent>& holder) -> bool {
    if (cur == sigma) {
      best = path;
      return true;
    }
    const std::size_t bound = best ? best->size() - 1 : max_length;
    if (bound <= path.size()) return false;
    const std::size_t budget = bound - path.size();
    if (unfinished(cur) > budget) return false;
    if (auto it = failed.find(cur); it != failed.end() && it->second >= budget) return false;
    if (max_nodes != 0 && stats.nodes >= max_nodes) {
      out_of_nodes = true;
      return false;
    }
    ++stats.nodes;
    stats.max_depth = std::max(stats.max_depth, path.size());
    bool found = false;
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      const Item y = best_feasible_item(inst, cur, holder, i);
      if (y == kNoItem) continue;
      const Item from = cur[i];
      path.push_back({i, from, y});
      holder[static_cast<std::size_t>(from)] = kNoAgent;
      holder[static_cast<std::size_t>(y)] = i;
      cur.assign(i, y);
      if (dfs(cur, holder)) found = true;
      cur.assign(i, from);
      holder[static_cast<std::size_t>(y)] = kNoAgent;
      holder[static_cast<std::size_t>(from)] = i;
      path.pop_back();
    }
    if (!found && !out_of_nodes) {
      auto& slot = failed[cur];
      slot = std::max(slot, budget);
    }
    return found;
  };

  Matching cur = mu;
  std::vector<Agent> holder = holders_of(inst.num_items(), cur);
  dfs(cur, holder);

  if (stats.nodes > saturating_pow(n, max_length)) {
    throw InternalError("length branching expanded " + std::to_string(stats.nodes) + " nodes, above n^l");
  }
  if (best) return SolveResult::make_solved(ReformSequence{mu, std::move(*best), {}}, stats);
  return SolveResult::make_failed(out_of_nodes ? SolveStatus::budget_exhausted : SolveStatus::infeasible, stats);
}

// ---------------------------------------------------------------------------
// Parameter |K|
// ---------------------------------------------------------------------------

/// Items held neither initially nor in the reformist matching.
inline std::vector<Item> intermediate_items(const Instance& inst, const Matching& mu, const Matching& sigma) {
  std::vector<char> used(inst.num_items(), 0);
  for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) {
    used[static_cast<std::size_t>(mu[i])] = 1;
    used[static_cast<std::size_t>(sigma[i])] = 1;
  }
  std::vector<Item> k;
  for (Item x = 0; static_cast<std::size_t>(x) < inst.num_items(); ++x) {
    if (!used[static_cast<std::size_t>(x)]) k.push_back(x);
  }
  return k;
}

namespace detail {

/// Instance state inside the |K| branching: the original ranks restricted by
/// an allowed mask, plus finished agents and deleted items.
struct KState {
  Matching cur;
  std::vector<char> allowed;  // n*m
  std::vector<char> finished;
  std::vector<char> deleted;

  [[nodiscard]] bool ok(const Instance& inst, Agent i, Item x) const {
    return allowed[static_cast<std::size_t>(i) * inst.num_items() + static_cast<std::size_t>(x)] != 0;
  }
  void forbid(const Instance& inst, Agent i, Item x) {
    allowed[static_cast<std::size_t>(i) * inst.num_items() + static_cast<std::size_t>(x)] = 0;
  }
  void delete_item(const Instance& inst, Item x) {
    deleted[static_cast<std::size_t>(x)] = 1;
    for (Agent j : inst.acceptors(x)) forbid(inst, j, x);
  }
};

class KSolver {
 public:
  KSolver(const Instance& inst, const Matching& sigma, std::vector<char> in_k, std::size_t k, SolveStats& stats)
      : inst_(inst), sigma_(sigma), in_k_(std::move(in_k)), k_(k), stats_(stats) {}

  std::optional<std::vector<ExchangeStep>> solve(KState st, std::size_t depth) {
    ++stats_.nodes;
    ++stats_.recursion_calls;
    stats_.max_depth = std::max(stats_.max_depth, depth);
    if (depth > k_) throw InternalError("|K| branching exceeded depth |K|");
    const std::size_t n = inst_.num_agents();
    std::vector<ExchangeStep> prefix;
    std::vector<Agent> holder = holders_of(inst_.num_items(), st.cur);

    for (bool progress = true; progress;) {
      progress = false;
      for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
        if (st.finished[static_cast<std::size_t>(i)]) continue;
        if (!legal(st, holder, i, sigma_[i])) continue;
        const Item from = st.cur[i];
        prefix.push_back({i, from, sigma_[i]});
        holder[static_cast<std::size_t>(from)] = kNoAgent;
        holder[static_cast<std::size_t>(sigma_[i])] = i;
        st.cur.assign(i, sigma_[i]);
        st.finished[static_cast<std::size_t>(i)] = 1;
        st.delete_item(inst_, from);
        progress = true;
        break;
      }
    }
    if (std::all_of(st.finished.begin(), st.finished.end(), [](char c) { return c != 0; })) return prefix;

    Agent chosen = kNoAgent;
    Item x = kNoItem;
    for (Agent i = 0; static_cast<std::size_t>(i) < n && chosen == kNoAgent; ++i) {
      if (st.finished[static_cast<std::size_t>(i)]) continue;
      for (Item y : inst_.prefs(i)) {
        if (!st.ok(inst_, i, y) || !in_k_[static_cast<std::size_t>(y)] || st.deleted[static_cast<std::size_t>(y)] ||
            holder[static_cast<std::size_t>(y)] != kNoAgent) {
          continue;
        }
        std::size_t users = 0;
        for (Agent j : inst_.acceptors(y)) users += !st.finished[static_cast<std::size_t>(j)] && st.ok(inst_, j, y);
        if (users == 1) {
          chosen = i;
          x = y;
          break;
        }
      }
    }
    if (chosen == kNoAgent) return std::nullopt;

    std::optional<std::vector<ExchangeStep>> take;
    if (legal(st, holder, chosen, x)) {
      KState next = st;
      const Item from = next.cur[chosen];
      next.cur.assign(chosen, x);
      next.delete_item(inst_, from);
      const int rx = inst_.rank(chosen, x);
      for (Item z : inst_.prefs(chosen)) {
        if (inst_.rank(chosen, z) > rx) next.forbid(inst_, chosen, z);
      }
      take = solve(std::move(next), depth + 1);
      if (take) take->insert(take->begin(), ExchangeStep{chosen, from, x});
    }
    KState skip_state = st;
    skip_state.forbid(inst_, chosen, x);
    auto skip = solve(std::move(skip_state), depth + 1);

    std::optional<std::vector<ExchangeStep>> pick;
    if (take && (!skip || take->size() <= skip->size())) {
      pick = std::move(take);
    } else {
      pick = std::move(skip);
    }
    if (!pick) return std::nullopt;
    prefix.insert(prefix.end(), pick->begin(), pick->end());
    return prefix;
  }

 private:
  /// ⤳ legality under the restricted lists.
  bool legal(const KState& st, const std::vector<Agent>& holder, Agent i, Item y) const {
    if (!st.ok(inst_, i, y) || holder[static_cast<std::size_t>(y)] != kNoAgent) return false;
    const int ry = inst_.rank(i, y);
    if (ry >= inst_.rank(i, st.cur[i])) return false;
    for (Agent j : inst_.acceptors(y)) {
      if (j != i && st.ok(inst_, j, y) && inst_.rank(j, y) < inst_.rank(j, st.cur[j])) return false;
    }
    for (Item z : inst_.prefs(i)) {
      if (z == y) break;
      const Agent h = holder[static_cast<std::size_t>(z)];
      if (st.ok(inst_, i, z) && h != kNoAgent && h != i) return false;
    }
    return true;
  }

  const Instance& inst_;
  const Matching& sigma_;
  std::vector<char> in_k_;
  std::size_t k_;
  SolveStats& stats_;
};

}  // namespace detail

/// Exact shortest sequence by branching on intermediate items. Requires a
/// preprocessed instance; the recursion depth is at most |K|.
inline SolveResult fpt_by_intermediate(const Instance& inst, const Matching& mu) {
  require_valid(inst);
  const Matching sigma = require_preprocessed(inst, mu);
  const std::size_t n = inst.num_agents();
  const std::size_t m = inst.num_items();
  const auto k_items = intermediate_items(inst, mu, sigma);
  std::vector<char> in_k(m, 0);
  for (Item x : k_items) in_k[static_cast<std::size_t>(x)] = 1;

  detail::KState st{mu, std::vector<char>(n * m, 0), std::vector<char>(n, 0), std::vector<char>(m, 0)};
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    for (Item x : inst.prefs(i)) st.allowed[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(x)] = 1;
  }
  SolveStats stats;
  stats.solver = "fpt_k";
  detail::KSolver solver(inst, sigma, std::move(in_k), k_items.size(), stats);
  auto steps = solver.solve(std::move(st), 0);
  if (!steps) return SolveResult::make_failed(SolveStatus::infeasible, stats);
  ReformSequence seq{mu, std::move(*steps), {}};
  const VerifyReport check = verify_sequence(inst, seq);
  if (!check.valid || check.final_matching != sigma) {
    throw InternalError("|K| branching produced an invalid sequence: " +
                        (check.valid ? std::string("does not end at the reformist matching") : check.reason));
  }
  return SolveResult::make_solved(std::move(seq), stats);
}

}  // namespace reform
