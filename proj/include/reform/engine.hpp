#pragma once

// Iterative improvement to the reformist envy-free matching, preprocessing
// of instances for the shortest-sequence solvers, reachability between
// envy-free matchings, and sequence verification.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "reform/core.hpp"

namespace reform {

// ---------------------------------------------------------------------------
// Nomination policies
// ---------------------------------------------------------------------------

/// Chooses which agent moves next. Every policy is deterministic given its
/// parameters; the nominated agent always moves to her most preferred
/// feasible item.
///
///  - fixed_order: priority list; the first listed agent with a feasible step
///    is nominated. Agents missing from the list follow in index order.
///  - round_robin: cycles through the given order (identity by default),
///    skipping agents without a feasible step.
///  - random: uniform over agents with a feasible step, seeded.
///  - best_first: lowest-index agent with a feasible step.
class NominationPolicy {
 public:
  enum class Kind { fixed_order, round_robin, random, best_first };

  static NominationPolicy fixed_order(std::vector<Agent> priority) {
    return NominationPolicy(Kind::fixed_order, std::move(priority), 0);
  }
  static NominationPolicy round_robin(std::vector<Agent> order = {}) {
    return NominationPolicy(Kind::round_robin, std::move(order), 0);
  }
  static NominationPolicy random(std::uint64_t seed) { return NominationPolicy(Kind::random, {}, seed); }
  static NominationPolicy best_first() { return NominationPolicy(Kind::best_first, {}, 0); }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<Agent>& order() const noexcept { return order_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Per-run chooser; holds the cursor or RNG state.
  class Chooser {
   public:
    Chooser(const NominationPolicy& policy, std::size_t num_agents) : kind_(policy.kind_), rng_(policy.seed_) {
      std::vector<char> listed(num_agents, 0);
      for (Agent a : policy.order_) {
        if (a < 0 || static_cast<std::size_t>(a) >= num_agents || listed[static_cast<std::size_t>(a)]) {
          throw InvalidInput("nomination order must list distinct agents of the instance");
        }
        listed[static_cast<std::size_t>(a)] = 1;
        order_.push_back(a);
      }
      for (std::size_t a = 0; a < num_agents; ++a) {
        if (!listed[a]) order_.push_back(static_cast<Agent>(a));
      }
    }

    /// `candidates[i]` is true when agent i has a feasible step. At least one
    /// candidate must exist.
    Agent choose(const std::vector<char>& candidates) {
      switch (kind_) {
        case Kind::best_first:
          for (std::size_t a = 0; a < candidates.size(); ++a) {
            if (candidates[a]) return static_cast<Agent>(a);
          }
          break;
        case Kind::fixed_order:
          for (Agent a : order_) {
            if (candidates[static_cast<std::size_t>(a)]) return a;
          }
          break;
        case Kind::round_robin:
          for (std::size_t k = 0; k < order_.size(); ++k) {
            const Agent a = order_[(cursor_ + k) % order_.size()];
            if (candidates[static_cast<std::size_t>(a)]) {
              cursor_ = (cursor_ + k + 1) % order_.size();
              return a;
            }
          }
          break;
        case Kind::random: {
          std::vector<Agent> pool;
          for (std::size_t a = 0; a < candidates.size(); ++a) {
            if (candidates[a]) pool.push_back(static_cast<Agent>(a));
          }
          if (pool.empty()) break;
          std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
          return pool[pick(rng_)];
        }
      }
      throw InternalError("nomination requested without candidates");
    }

   private:
    Kind kind_;
    std::vector<Agent> order_;
    std::size_t cursor_ = 0;
    std::mt19937_64 rng_;
  };

 private:
  NominationPolicy(Kind kind, std::vector<Agent> order, std::uint64_t seed)
      : kind_(kind), order_(std::move(order)), seed_(seed) {}

  Kind kind_;
  std::vector<Agent> order_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Reformist matching
// ---------------------------------------------------------------------------

struct ReformOutcome {
  Matching reformist;
  ReformSequence sequence;
};

/// Runs the improvement process from an envy-free μ until no agent can
/// improve. The result is independent of the policy; the sequence is not.
/// Each step strictly improves one agent, so more than |M|·|N| steps means a
/// bug and raises InternalError.
inline ReformOutcome compute_reformist(const Instance& inst, const Matching& mu,
                                       const NominationPolicy& policy = NominationPolicy::best_first()) {
  require_valid(inst);
  require_envy_free(inst, mu, "initial matching");
  NominationPolicy::Chooser chooser(policy, inst.num_agents());

  const std::size_t cap = inst.num_items() * inst.num_agents();
  ReformOutcome out{mu, ReformSequence{mu, {}, {}}};
  Matching& cur = out.reformist;
  std::vector<Agent> holder = holders_of(inst.num_items(), cur);
  std::vector<char> candidates(inst.num_agents(), 0);
  std::vector<Item> best(inst.num_agents(), kNoItem);

  for (;;) {
    bool any = false;
    for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
      best[static_cast<std::size_t>(i)] = best_feasible_item(inst, cur, holder, i);
      candidates[static_cast<std::size_t>(i)] = best[static_cast<std::size_t>(i)] != kNoItem;
      any = any || candidates[static_cast<std::size_t>(i)];
    }
    if (!any) break;
    if (out.sequence.steps.size() >= cap) {
      throw InternalError("improvement process exceeded |M|*|N| = " + std::to_string(cap) + " steps");
    }
    const Agent i = chooser.choose(candidates);
    const Item from = cur[i];
    const Item to = best[static_cast<std::size_t>(i)];
    out.sequence.steps.push_back({i, from, to});
    holder[static_cast<std::size_t>(from)] = kNoAgent;
    holder[static_cast<std::size_t>(to)] = i;
    cur.assign(i, to);
  }
  return out;
}

inline Matching reformist_matching(const Instance& inst, const Matching& mu) {
  return compute_reformist(inst, mu).reformist;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

/// Reduced instance in which every agent's list runs from σ(i) (top) down to
/// μ(i) (bottom) with σ(i) ≠ μ(i), plus the maps back to the original.
struct PreprocessReport {
  Instance reduced;
  Matching reduced_initial;
  Matching reformist;  // σ on the reduced instance
  Matching original_reformist;
  std::vector<Agent> removed_agents;  // original ids
  std::vector<Item> removed_items;    // original ids
  std::vector<std::vector<Item>> trimmed;  // per original agent, items cut below μ(i)
  std::vector<Agent> agent_to_original;
  std::vector<Item> item_to_original;
  std::vector<Agent> original_to_agent;  // kNoAgent when removed
  std::vector<Item> original_to_item;    // kNoItem when removed
};

/// Applies, to a fixed point: drop items ranked below μ(i) from M_i; delete
/// items ranked above σ(i) from the whole instance; remove agents with
/// σ(i) = μ(i) together with their item. Items no surviving agent accepts are
/// then dropped as well.
inline PreprocessReport preprocess(const Instance& inst, const Matching& mu) {
  const Matching sigma = reformist_matching(inst, mu);
  const std::size_t n = inst.num_agents();
  const std::size_t m = inst.num_items();

  PreprocessReport rep;
  rep.original_reformist = sigma;
  rep.trimmed.assign(n, {});
  std::vector<std::vector<Item>> lists = inst.all_prefs();
  std::vector<char> agent_alive(n, 1);
  std::vector<char> item_alive(m, 1);

  auto erase_item_everywhere = [&](Item x) {
    item_alive[static_cast<std::size_t>(x)] = 0;
    for (std::size_t i = 0; i < n; ++i) std::erase(lists[i], x);
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!agent_alive[i]) continue;
      auto& list = lists[i];
      auto at = std::find(list.begin(), list.end(), mu[static_cast<Agent>(i)]);
      if (at != list.end() && at + 1 != list.end()) {
        rep.trimmed[i].insert(rep.trimmed[i].end(), at + 1, list.end());
        list.erase(at + 1, list.end());
        changed = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!agent_alive[i]) continue;
      std::vector<Item> above;
      for (Item x : lists[i]) {
        if (x == sigma[static_cast<Agent>(i)]) break;
        above.push_back(x);
      }
      for (Item x : above) {
        erase_item_everywhere(x);
        changed = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (agent_alive[i] && sigma[static_cast<Agent>(i)] == mu[static_cast<Agent>(i)]) {
        agent_alive[i] = 0;
        lists[i].clear();
        erase_item_everywhere(mu[static_cast<Agent>(i)]);
        changed = true;
      }
    }
  }
  std::vector<char> used(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!agent_alive[i]) continue;
    for (Item x : lists[i]) used[static_cast<std::size_t>(x)] = 1;
  }

  rep.original_to_agent.assign(n, kNoAgent);
  rep.original_to_item.assign(m, kNoItem);
  std::vector<std::string> item_names;
  for (std::size_t x = 0; x < m; ++x) {
    if (item_alive[x] && used[x]) {
      rep.original_to_item[x] = static_cast<Item>(rep.item_to_original.size());
      rep.item_to_original.push_back(static_cast<Item>(x));
      item_names.push_back(inst.item_name(static_cast<Item>(x)));
    } else {
      rep.removed_items.push_back(static_cast<Item>(x));
    }
  }
  std::vector<std::string> agent_names;
  std::vector<std::vector<Item>> reduced_lists;
  std::vector<Item> init;
  std::vector<Item> reform;
  for (std::size_t i = 0; i < n; ++i) {
    if (!agent_alive[i]) {
      rep.removed_agents.push_back(static_cast<Agent>(i));
      continue;
    }
    rep.original_to_agent[i] = static_cast<Agent>(rep.agent_to_original.size());
    rep.agent_to_original.push_back(static_cast<Agent>(i));
    agent_names.push_back(inst.agent_name(static_cast<Agent>(i)));
    std::vector<Item> list;
    for (Item x : lists[i]) list.push_back(rep.original_to_item[static_cast<std::size_t>(x)]);
    reduced_lists.push_back(std::move(list));
    init.push_back(rep.original_to_item[static_cast<std::size_t>(mu[static_cast<Agent>(i)])]);
    reform.push_back(rep.original_to_item[static_cast<std::size_t>(sigma[static_cast<Agent>(i)])]);
  }
  rep.reduced = Instance(std::move(agent_names), std::move(item_names), std::move(reduced_lists));
  rep.reduced_initial = Matching(std::move(init));
  rep.reformist = Matching(std::move(reform));
  return rep;
}

/// Maps a sequence on the reduced instance back to original ids, starting
/// from the original initial matching.
inline ReformSequence lift_sequence(const PreprocessReport& rep, const ReformSequence& reduced,
                                    const Matching& original_initial) {
  ReformSequence out{original_initial, {}, reduced.labels};
  out.steps.reserve(reduced.steps.size());
  for (const auto& s : reduced.steps) {
    out.steps.push_back({rep.agent_to_original[static_cast<std::size_t>(s.agent)],
                         rep.item_to_original[static_cast<std::size_t>(s.from_item)],
                         rep.item_to_original[static_cast<std::size_t>(s.to_item)]});
  }
  return out;
}

/// True when every list runs from σ(i) down to μ(i), σ(i) ≠ μ(i), where σ is
/// the reformist matching of μ.
inline bool is_preprocessed(const Instance& inst, const Matching& mu, const Matching& sigma) {
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    auto list = inst.prefs(i);
    if (list.size() < 2 || list.front() != sigma[i] || list.back() != mu[i]) return false;
  }
  return true;
}

inline Matching require_preprocessed(const Instance& inst, const Matching& mu) {
  const Matching sigma = reformist_matching(inst, mu);
  if (!is_preprocessed(inst, mu, sigma)) {
    throw InvalidInput("instance is not preprocessed (run preprocess first)");
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Reachability
// ---------------------------------------------------------------------------

/// Decides whether τ can be reached from μ by ⤳ steps: reject if some agent
/// would have to move down; otherwise delete every item some agent ranks
/// above her τ-item and compare the reformist matching of μ in that
/// restricted instance with τ. A target with envy is a well-formed question
/// whose answer is no.
inline bool is_reachable(const Instance& inst, const Matching& mu, const Matching& tau) {
  require_valid(inst);
  require_envy_free(inst, mu, "initial matching");
  require_matching(inst, tau, "target matching");
  if (!is_envy_free(inst, tau)) return false;
  const std::size_t n = inst.num_agents();
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    if (inst.prefers(i, mu[i], tau[i])) return false;
  }
  std::vector<char> banned(inst.num_items(), 0);
  for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
    for (Item x : inst.prefs(i)) {
      if (x == tau[i]) break;
      banned[static_cast<std::size_t>(x)] = 1;
    }
  }
  std::vector<std::vector<Item>> lists = inst.all_prefs();
  for (auto& list : lists) {
    std::erase_if(list, [&](Item x) { return banned[static_cast<std::size_t>(x)] != 0; });
  }
  const Instance restricted = inst.with_prefs(std::move(lists));
  return reformist_matching(restricted, mu) == tau;
}

// ---------------------------------------------------------------------------
// Sequence verification
// ---------------------------------------------------------------------------

struct VerifyReport {
  bool valid = false;
  std::optional<std::size_t> failing_step;  // nullopt with !valid: initial matching rejected
  std::string reason;
  Matching final_matching;
  /// The last matching admits no further step, i.e. it is the reformist one.
  bool complete = false;
};

/// Replays the sequence; valid iff every step is a ⤳ step from its
/// predecessor and the initial matching is envy-free.
inline VerifyReport verify_sequence(const Instance& inst, const ReformSequence& seq) {
  VerifyReport rep;
  if (auto v = validate_instance(inst); !v.empty()) {
    rep.reason = "invalid instance: " + v.front().message;
    return rep;
  }
  if (auto p = validate_matching(inst, seq.initial); !p.empty()) {
    rep.reason = "invalid initial matching: " + p.front();
    return rep;
  }
  Matching cur = seq.initial;
  std::vector<Agent> holder = holders_of(inst.num_items(), cur);
  if (!is_envy_free_unchecked(inst, cur, holder)) {
    rep.reason = "initial matching is not envy-free";
    return rep;
  }
  for (std::size_t t = 0; t < seq.steps.size(); ++t) {
    const auto& s = seq.steps[t];
    if (auto v = check_exchange(inst, cur, holder, s)) {
      rep.failing_step = t;
      rep.reason = describe(inst, *v);
      rep.final_matching = cur;
      return rep;
    }
    holder[static_cast<std::size_t>(s.from_item)] = kNoAgent;
    holder[static_cast<std::size_t>(s.to_item)] = s.agent;
    cur.assign(s.agent, s.to_item);
  }
  rep.valid = true;
  rep.final_matching = cur;
  rep.complete = feasible_exchanges_unchecked(inst, cur, holder).empty();
  return rep;
}

}  // namespace reform
