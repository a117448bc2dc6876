#pragma once

// House-allocation model: instances with strict incomplete preference lists,
// injective matchings, envy, and single-agent exchange steps.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace reform {

using Agent = std::int32_t;
using Item = std::int32_t;

inline constexpr Agent kNoAgent = -1;
inline constexpr Item kNoItem = -1;
inline constexpr int kUnranked = -1;

class ReformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side precondition was violated.
class InvalidInput : public ReformError {
 public:
  using ReformError::ReformError;
};

/// A proven invariant failed at runtime. Always a bug or a broken input
/// contract that slipped past validation.
class InternalError : public ReformError {
 public:
  using ReformError::ReformError;
};

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

/// Agents and items are dense 0-based indices. Names are carried for I/O and
/// diagnostics only. The instance is immutable once built.
///
/// Construction never throws on malformed preference lists; use
/// validate_instance() to obtain the list of violations. Out-of-range entries
/// are ignored by the rank table and repeated entries keep their first
/// position.
class Instance {
 public:
  Instance() = default;

  Instance(std::vector<std::string> agent_names, std::vector<std::string> item_names,
           std::vector<std::vector<Item>> prefs)
      : agent_names_(std::move(agent_names)),
        item_names_(std::move(item_names)),
        prefs_(std::move(prefs)) {
    if (agent_names_.size() != prefs_.size()) {
      throw InvalidInput("agent name count does not match preference list count");
    }
    index();
  }

  /// Agents are named "1".."n" and items "0".."m-1".
  static Instance from_prefs(std::size_t num_items, std::vector<std::vector<Item>> prefs) {
    std::vector<std::string> agents;
    agents.reserve(prefs.size());
    for (std::size_t i = 0; i < prefs.size(); ++i) agents.push_back(std::to_string(i + 1));
    std::vector<std::string> items;
    items.reserve(num_items);
    for (std::size_t x = 0; x < num_items; ++x) items.push_back(std::to_string(x));
    return Instance(std::move(agents), std::move(items), std::move(prefs));
  }

  /// Same names, different preference lists.
  [[nodiscard]] Instance with_prefs(std::vector<std::vector<Item>> prefs) const {
    return Instance(agent_names_, item_names_, std::move(prefs));
  }

  [[nodiscard]] std::size_t num_agents() const noexcept { return prefs_.size(); }
  [[nodiscard]] std::size_t num_items() const noexcept { return item_names_.size(); }

  [[nodiscard]] std::span<const Item> prefs(Agent i) const { return prefs_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<std::vector<Item>>& all_prefs() const noexcept { return prefs_; }
  [[nodiscard]] std::size_t list_length(Agent i) const { return prefs_[static_cast<std::size_t>(i)].size(); }

  /// Position of x in agent i's list (0 = most preferred), or kUnranked.
  [[nodiscard]] int rank(Agent i, Item x) const noexcept {
    if (x < 0 || static_cast<std::size_t>(x) >= num_items()) return kUnranked;
    return ranks_[static_cast<std::size_t>(i) * num_items() + static_cast<std::size_t>(x)];
  }

  [[nodiscard]] bool accepts(Agent i, Item x) const noexcept { return rank(i, x) != kUnranked; }

  /// x ≻_i y. False unless both items are acceptable to i.
  [[nodiscard]] bool prefers(Agent i, Item x, Item y) const noexcept {
    const int rx = rank(i, x);
    const int ry = rank(i, y);
    return rx != kUnranked && ry != kUnranked && rx < ry;
  }

  /// Agents whose list contains x, ascending.
  [[nodiscard]] std::span<const Agent> acceptors(Item x) const {
    return acceptors_[static_cast<std::size_t>(x)];
  }

  [[nodiscard]] const std::string& agent_name(Agent i) const { return agent_names_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::string& item_name(Item x) const { return item_names_[static_cast<std::size_t>(x)]; }
  [[nodiscard]] const std::vector<std::string>& agent_names() const noexcept { return agent_names_; }
  [[nodiscard]] const std::vector<std::string>& item_names() const noexcept { return item_names_; }

  [[nodiscard]] std::optional<Agent> find_agent(const std::string& name) const {
    auto it = agent_index_.find(name);
    if (it == agent_index_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::optional<Item> find_item(const std::string& name) const {
    auto it = item_index_.find(name);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.agent_names_ == b.agent_names_ && a.item_names_ == b.item_names_ && a.prefs_ == b.prefs_;
  }

 private:
  void index() {
    const std::size_t n = num_agents();
    const std::size_t m = num_items();
    ranks_.assign(n * m, kUnranked);
    acceptors_.assign(m, {});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& list = prefs_[i];
      for (std::size_t pos = 0; pos < list.size(); ++pos) {
        const Item x = list[pos];
        if (x < 0 || static_cast<std::size_t>(x) >= m) continue;
        int& slot = ranks_[i * m + static_cast<std::size_t>(x)];
        if (slot != kUnranked) continue;
        slot = static_cast<int>(pos);
        acceptors_[static_cast<std::size_t>(x)].push_back(static_cast<Agent>(i));
      }
    }
    for (std::size_t i = 0; i < agent_names_.size(); ++i) {
      agent_index_.emplace(agent_names_[i], static_cast<Agent>(i));
    }
    for (std::size_t x = 0; x < item_names_.size(); ++x) {
      item_index_.emplace(item_names_[x], static_cast<Item>(x));
    }
  }

  std::vector<std::string> agent_names_;
  std::vector<std::string> item_names_;
  std::vector<std::vector<Item>> prefs_;
  std::vector<int> ranks_;
  std::vector<std::vector<Agent>> acceptors_;
  std::unordered_map<std::string, Agent> agent_index_;
  std::unordered_map<std::string, Item> item_index_;
};

struct InstanceViolation {
  enum class Kind { duplicate_item, unknown_item, duplicate_agent_name, duplicate_item_name };
  Kind kind;
  Agent agent = kNoAgent;
  Item item = kNoItem;
  std::string message;
};

inline std::vector<InstanceViolation> validate_instance(const Instance& inst) {
  std::vector<InstanceViolation> out;
  const std::size_t m = inst.num_items();
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    std::vector<char> seen(m, 0);
    for (Item x : inst.prefs(i)) {
      if (x < 0 || static_cast<std::size_t>(x) >= m) {
        out.push_back({InstanceViolation::Kind::unknown_item, i, x,
                       "agent " + inst.agent_name(i) + " lists unknown item #" + std::to_string(x)});
        continue;
      }
      if (seen[static_cast<std::size_t>(x)]) {
        out.push_back({InstanceViolation::Kind::duplicate_item, i, x,
                       "agent " + inst.agent_name(i) + " lists item " + inst.item_name(x) + " twice"});
      }
      seen[static_cast<std::size_t>(x)] = 1;
    }
  }
  auto dup_names = [&](const std::vector<std::string>& names, InstanceViolation::Kind kind, const char* what) {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      if (sorted[k] == sorted[k - 1] && (k == 1 || sorted[k] != sorted[k - 2])) {
        out.push_back({kind, kNoAgent, kNoItem, std::string("duplicate ") + what + " name " + sorted[k]});
      }
    }
  };
  dup_names(inst.agent_names(), InstanceViolation::Kind::duplicate_agent_name, "agent");
  dup_names(inst.item_names(), InstanceViolation::Kind::duplicate_item_name, "item");
  return out;
}

inline void require_valid(const Instance& inst) {
  auto violations = validate_instance(inst);
  if (!violations.empty()) throw InvalidInput("invalid instance: " + violations.front().message);
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

/// Total agent → item map. Validity against an instance (injective,
/// acceptable) is checked by validate_matching(), not by the constructor.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<Item> assignment) : assignment_(std::move(assignment)) {}

  [[nodiscard]] Item operator[](Agent i) const { return assignment_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::size_t size() const noexcept { return assignment_.size(); }
  [[nodiscard]] std::span<const Item> items() const noexcept { return assignment_; }

  void assign(Agent i, Item x) { assignment_[static_cast<std::size_t>(i)] = x; }

  [[nodiscard]] Matching with(Agent i, Item x) const {
    Matching copy = *this;
    copy.assign(i, x);
    return copy;
  }

  friend bool operator==(const Matching&, const Matching&) = default;
  friend auto operator<=>(const Matching&, const Matching&) = default;

 private:
  std::vector<Item> assignment_;
};

struct MatchingHash {
  std::size_t operator()(const Matching& mu) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (Item x : mu.items()) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// item → holding agent (kNoAgent when unassigned). Assumes a valid matching.
inline std::vector<Agent> holders_of(std::size_t num_items, const Matching& mu) {
  std::vector<Agent> holder(num_items, kNoAgent);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Item x = mu[static_cast<Agent>(i)];
    if (x >= 0 && static_cast<std::size_t>(x) < num_items) holder[static_cast<std::size_t>(x)] = static_cast<Agent>(i);
  }
  return holder;
}

inline std::vector<std::string> validate_matching(const Instance& inst, const Matching& mu) {
  std::vector<std::string> problems;
  if (mu.size() != inst.num_agents()) {
    problems.push_back("matching covers " + std::to_string(mu.size()) + " agents, instance has " +
                       std::to_string(inst.num_agents()));
    return problems;
  }
  std::vector<Agent> holder(inst.num_items(), kNoAgent);
  for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) {
    const Item x = mu[i];
    if (!inst.accepts(i, x)) {
      problems.push_back("agent " + inst.agent_name(i) + " is assigned an unacceptable item");
      continue;
    }
    Agent& h = holder[static_cast<std::size_t>(x)];
    if (h != kNoAgent) {
      problems.push_back("item " + inst.item_name(x) + " assigned to both " + inst.agent_name(h) + " and " +
                         inst.agent_name(i));
    }
    h = i;
  }
  return problems;
}

inline void require_matching(const Instance& inst, const Matching& mu, const char* what = "matching") {
  auto problems = validate_matching(inst, mu);
  if (!problems.empty()) throw InvalidInput(std::string("invalid ") + what + ": " + problems.front());
}

// ---------------------------------------------------------------------------
// Envy
// ---------------------------------------------------------------------------

using EnvyPair = std::pair<Agent, Agent>;  // (envier, envied)

inline std::vector<EnvyPair> envy_pairs_unchecked(const Instance& inst, const Matching& mu,
                                                  std::span<const Agent> holder) {
  std::vector<EnvyPair> out;
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    for (Item x : inst.prefs(i)) {
      if (x == mu[i]) break;
      const Agent h = holder[static_cast<std::size_t>(x)];
      if (h != kNoAgent && h != i) out.emplace_back(i, h);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// All pairs (i, j), i ≠ j, with μ(j) ≻_i μ(i), sorted.
inline std::vector<EnvyPair> envy_pairs(const Instance& inst, const Matching& mu) {
  require_matching(inst, mu);
  const auto holder = holders_of(inst.num_items(), mu);
  return envy_pairs_unchecked(inst, mu, holder);
}

inline bool is_envy_free_unchecked(const Instance& inst, const Matching& mu, std::span<const Agent> holder) {
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    for (Item x : inst.prefs(i)) {
      if (x == mu[i]) break;
      const Agent h = holder[static_cast<std::size_t>(x)];
      if (h != kNoAgent && h != i) return false;
    }
  }
  return true;
}

inline bool is_envy_free(const Instance& inst, const Matching& mu) {
  require_matching(inst, mu);
  const auto holder = holders_of(inst.num_items(), mu);
  return is_envy_free_unchecked(inst, mu, holder);
}

inline void require_envy_free(const Instance& inst, const Matching& mu, const char* what = "matching") {
  require_matching(inst, mu, what);
  const auto holder = holders_of(inst.num_items(), mu);
  auto pairs = envy_pairs_unchecked(inst, mu, holder);
  if (!pairs.empty()) {
    throw InvalidInput(std::string(what) + " is not envy-free: agent " + inst.agent_name(pairs.front().first) +
                       " envies agent " + inst.agent_name(pairs.front().second));
  }
}

// ---------------------------------------------------------------------------
// Exchange steps
// ---------------------------------------------------------------------------

struct ExchangeStep {
  Agent agent = kNoAgent;
  Item from_item = kNoItem;
  Item to_item = kNoItem;

  friend bool operator==(const ExchangeStep&, const ExchangeStep&) = default;
};

struct ExchangeViolation {
  enum class Kind { unknown_agent, stale_from_item, unacceptable, not_unassigned, not_improving, creates_envy };
  Kind kind;
  Agent envier = kNoAgent;
  Agent envied = kNoAgent;
};

inline std::string describe(const Instance& inst, const ExchangeViolation& v) {
  using K = ExchangeViolation::Kind;
  switch (v.kind) {
    case K::unknown_agent: return "unknown agent";
    case K::stale_from_item: return "agent does not hold the from-item";
    case K::unacceptable: return "target item is not acceptable";
    case K::not_unassigned: return "not unassigned";
    case K::not_improving: return "not improving";
    case K::creates_envy:
      return "creates envy (" + inst.agent_name(v.envier) + "," + inst.agent_name(v.envied) + ")";
  }
  return "unknown violation";
}

/// Checks one ⤳ step against a matching assumed valid and envy-free. Only
/// pairs involving the moving agent can change, so only those are examined.
/// `holder` must describe `mu`.
inline std::optional<ExchangeViolation> check_exchange(const Instance& inst, const Matching& mu,
                                                       std::span<const Agent> holder, const ExchangeStep& step) {
  using K = ExchangeViolation::Kind;
  const Agent i = step.agent;
  if (i < 0 || static_cast<std::size_t>(i) >= inst.num_agents()) return ExchangeViolation{K::unknown_agent};
  if (mu[i] != step.from_item) return ExchangeViolation{K::stale_from_item};
  const Item y = step.to_item;
  if (!inst.accepts(i, y)) return ExchangeViolation{K::unacceptable};
  if (!inst.prefers(i, y, mu[i])) return ExchangeViolation{K::not_improving};
  if (holder[static_cast<std::size_t>(y)] != kNoAgent) return ExchangeViolation{K::not_unassigned};
  for (Agent j : inst.acceptors(y)) {
    if (j != i && inst.prefers(j, y, mu[j])) return ExchangeViolation{K::creates_envy, j, i};
  }
  for (Item x : inst.prefs(i)) {
    if (x == y) break;
    const Agent h = holder[static_cast<std::size_t>(x)];
    if (h != kNoAgent && h != i) return ExchangeViolation{K::creates_envy, i, h};
  }
  return std::nullopt;
}

/// Most preferred item y such that (i, μ(i), y) is a ⤳ step, or kNoItem.
inline Item best_feasible_item(const Instance& inst, const Matching& mu, std::span<const Agent> holder, Agent i) {
  for (Item y : inst.prefs(i)) {
    if (y == mu[i]) break;
    if (!check_exchange(inst, mu, holder, {i, mu[i], y})) return y;
  }
  return kNoItem;
}

inline std::vector<ExchangeStep> feasible_exchanges_unchecked(const Instance& inst, const Matching& mu,
                                                              std::span<const Agent> holder) {
  std::vector<ExchangeStep> out;
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    for (Item y : inst.prefs(i)) {
      if (y == mu[i]) break;
      ExchangeStep step{i, mu[i], y};
      if (!check_exchange(inst, mu, holder, step)) out.push_back(step);
    }
  }
  return out;
}

/// Every ⤳ step available from μ, ordered by agent ascending and then by the
/// agent's preference (best first).
inline std::vector<ExchangeStep> feasible_exchanges(const Instance& inst, const Matching& mu) {
  require_envy_free(inst, mu);
  const auto holder = holders_of(inst.num_items(), mu);
  return feasible_exchanges_unchecked(inst, mu, holder);
}

/// Applies a ⤳ step. Throws InfeasibleExchange naming the violated condition.
class InfeasibleExchange : public ReformError {
 public:
  InfeasibleExchange(const Instance& inst, ExchangeViolation v)
      : ReformError("infeasible exchange: " + describe(inst, v)), violation_(v) {}
  [[nodiscard]] const ExchangeViolation& violation() const noexcept { return violation_; }

 private:
  ExchangeViolation violation_;
};

inline Matching apply_exchange(const Instance& inst, const Matching& mu, const ExchangeStep& step) {
  require_envy_free(inst, mu);
  const auto holder = holders_of(inst.num_items(), mu);
  if (auto v = check_exchange(inst, mu, holder, step)) throw InfeasibleExchange(inst, *v);
  return mu.with(step.agent, step.to_item);
}

// ---------------------------------------------------------------------------
// Reform sequences
// ---------------------------------------------------------------------------

struct ReformSequence {
  Matching initial;
  std::vector<ExchangeStep> steps;
  /// Optional per-step annotations (phase labels); empty or one per step.
  std::vector<std::string> labels;

  [[nodiscard]] std::size_t length() const noexcept { return steps.size(); }

  /// Replays without checking legality.
  [[nodiscard]] Matching final_matching() const {
    Matching mu = initial;
    for (const auto& s : steps) mu.assign(s.agent, s.to_item);
    return mu;
  }
};

// ---------------------------------------------------------------------------
// Item graph
// ---------------------------------------------------------------------------

/// Vertices are items; an agent with list x1 ≻ … ≻ xk contributes arcs
/// (x2,x1), …, (xk,xk-1) labelled with that agent.
struct ItemGraph {
  struct Arc {
    Item tail;
    Item head;
    Agent label;
    friend auto operator<=>(const Arc&, const Arc&) = default;
  };
  std::size_t num_vertices = 0;
  std::vector<Arc> arcs;
};

inline ItemGraph build_item_graph(const Instance& inst) {
  require_valid(inst);
  ItemGraph g;
  g.num_vertices = inst.num_items();
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    auto list = inst.prefs(i);
    for (std::size_t k = 1; k < list.size(); ++k) g.arcs.push_back({list[k], list[k - 1], i});
  }
  std::sort(g.arcs.begin(), g.arcs.end(), [](const ItemGraph::Arc& a, const ItemGraph::Arc& b) {
    return std::tie(a.tail, a.head, a.label) < std::tie(b.tail, b.head, b.label);
  });
  return g;
}

}  // namespace reform
