#pragma once

// Preprocess, pick an exact solver, and map the answer back to the caller's
// agent and item ids.

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/solvers/bfs.hpp"
#include "reform/solvers/deg3.hpp"
#include "reform/solvers/fpt.hpp"
#include "reform/solvers/result.hpp"
#include "reform/solvers/two_acceptor.hpp"

namespace reform {

enum class Algorithm { automatic, bfs, deg3, two_acceptor, fpt_length, fpt_k };

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "auto") return Algorithm::automatic;
  if (s == "bfs") return Algorithm::bfs;
  if (s == "deg3") return Algorithm::deg3;
  if (s == "two-acceptor") return Algorithm::two_acceptor;
  if (s == "fpt-length") return Algorithm::fpt_length;
  if (s == "fpt-k") return Algorithm::fpt_k;
  return std::nullopt;
}

struct SolveOptions {
  std::size_t bfs_budget = kDefaultBfsBudget;
  /// Largest |K| handed to the intermediate-item branching.
  std::size_t k_cap = 16;
  /// Node cap per fpt-length call; 0 = unlimited.
  std::size_t length_node_budget = 5'000'000;
  /// Decision bound for fpt-length; unset means "find the minimum".
  std::optional<std::size_t> decision;
};

class NoSolverApplicable : public ReformError {
 public:
  explicit NoSolverApplicable(const std::vector<std::string>& reasons)
      : ReformError(join("no exact solver applicable within budgets", reasons)) {}

 private:
  static std::string join(std::string head, const std::vector<std::string>& reasons) {
    for (const auto& r : reasons) head += "\n  " + r;
    return head;
  }
};

namespace detail {

inline std::optional<std::string> deg3_obstacle(const Instance& inst) {
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    if (inst.list_length(i) > 3) {
      return "agent " + inst.agent_name(i) + " has " + std::to_string(inst.list_length(i)) + " items";
    }
  }
  return std::nullopt;
}

inline std::optional<std::string> two_acceptor_obstacle(const Instance& inst) {
  for (Item x = 0; static_cast<std::size_t>(x) < inst.num_items(); ++x) {
    if (inst.acceptors(x).size() > 2) {
      return "item " + inst.item_name(x) + " has " + std::to_string(inst.acceptors(x).size()) + " acceptors";
    }
  }
  return std::nullopt;
}

/// Π m_i, saturating; an upper bound on the matchings between μ and σ.
inline std::size_t state_estimate(const Instance& inst) {
  std::size_t total = 1;
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    const std::size_t m = std::max<std::size_t>(inst.list_length(i), 1);
    if (total > std::numeric_limits<std::size_t>::max() / m) return std::numeric_limits<std::size_t>::max();
    total *= m;
  }
  return total;
}

/// Iterative deepening on ℓ from n up to the length of a known sequence.
inline SolveResult length_deepening(const Instance& inst, const Matching& mu, const SolveOptions& opt) {
  const std::size_t upper = compute_reformist(inst, mu).sequence.length();
  SolveStats total;
  total.solver = "fpt_length";
  for (std::size_t l = inst.num_agents(); l <= upper; ++l) {
    SolveResult r = fpt_by_length(inst, mu, l, opt.length_node_budget);
    total.nodes += r.stats.nodes;
    total.max_depth = std::max(total.max_depth, r.stats.max_depth);
    if (r.status != SolveStatus::infeasible) {
      r.stats.nodes = total.nodes;
      r.stats.max_depth = total.max_depth;
      return r;
    }
  }
  throw InternalError("no sequence found up to the length of a known reformist sequence");
}

inline SolveResult run_reduced(Algorithm algo, const Instance& inst, const Matching& mu, const SolveOptions& opt) {
  switch (algo) {
    case Algorithm::bfs: return bfs_shortest(inst, mu, opt.bfs_budget);
    case Algorithm::deg3: return shortest_deg3(inst, mu);
    case Algorithm::two_acceptor: return shortest_two_acceptor(inst, mu);
    case Algorithm::fpt_k: {
      const auto sigma = reformist_matching(inst, mu);
      const std::size_t k = intermediate_items(inst, mu, sigma).size();
      if (k > opt.k_cap) {
        throw InvalidInput("|K| = " + std::to_string(k) + " exceeds the cap " + std::to_string(opt.k_cap));
      }
      return fpt_by_intermediate(inst, mu);
    }
    case Algorithm::fpt_length:
      if (opt.decision) return fpt_by_length(inst, mu, *opt.decision, opt.length_node_budget);
      return length_deepening(inst, mu, opt);
    case Algorithm::automatic: break;
  }
  throw InternalError("automatic dispatch reached run_reduced");
}

inline Algorithm choose(const Instance& inst, const Matching& mu, const SolveOptions& opt,
                        std::vector<std::string>& log) {
  if (auto why = deg3_obstacle(inst)) {
    log.push_back("deg3: skipped, " + *why);
  } else {
    log.push_back("deg3: selected");
    return Algorithm::deg3;
  }
  if (auto why = two_acceptor_obstacle(inst)) {
    log.push_back("two-acceptor: skipped, " + *why);
  } else {
    log.push_back("two-acceptor: selected");
    return Algorithm::two_acceptor;
  }
  const std::size_t k = intermediate_items(inst, mu, reformist_matching(inst, mu)).size();
  if (k > opt.k_cap) {
    log.push_back("fpt-k: skipped, |K| = " + std::to_string(k) + " above cap " + std::to_string(opt.k_cap));
  } else {
    log.push_back("fpt-k: selected, |K| = " + std::to_string(k));
    return Algorithm::fpt_k;
  }
  const std::size_t est = state_estimate(inst);
  if (est > opt.bfs_budget) {
    log.push_back("bfs: skipped, state estimate above budget " + std::to_string(opt.bfs_budget));
  } else {
    log.push_back("bfs: selected, state estimate " + std::to_string(est));
    return Algorithm::bfs;
  }
  log.push_back("fpt-length: selected");
  return Algorithm::fpt_length;
}

}  // namespace detail

/// Runs `algo` on the preprocessed instance and lifts the answer. The BFS
/// oracle needs no preprocessing and runs on the original instance.
inline SolveResult solve_with(Algorithm algo, const Instance& inst, const Matching& mu,
                              const SolveOptions& opt = {}) {
  require_valid(inst);
  require_envy_free(inst, mu, "initial matching");
  if (algo == Algorithm::bfs) return bfs_shortest(inst, mu, opt.bfs_budget);

  const PreprocessReport rep = preprocess(inst, mu);
  std::vector<std::string> log;
  const bool automatic = algo == Algorithm::automatic;
  SolveResult r;
  if (rep.reduced.num_agents() == 0) {
    log.push_back("preprocess: every agent already holds her reformist item");
    r = SolveResult::make_solved(ReformSequence{rep.reduced_initial, {}, {}}, SolveStats{});
  } else {
    if (automatic) algo = detail::choose(rep.reduced, rep.reduced_initial, opt, log);
    r = detail::run_reduced(algo, rep.reduced, rep.reduced_initial, opt);
    if (automatic && r.status == SolveStatus::budget_exhausted) {
      log.push_back(r.stats.solver + ": budget exhausted");
      throw NoSolverApplicable(log);
    }
  }
  r.stats.dispatch_log = std::move(log);
  if (r.solved()) {
    r.sequence = lift_sequence(rep, *r.sequence, mu);
    const VerifyReport check = verify_sequence(inst, *r.sequence);
    if (!check.valid || check.final_matching != rep.original_reformist) {
      throw InternalError("lifted sequence rejected: " +
                          (check.valid ? std::string("does not end at the reformist matching") : check.reason));
    }
  }
  return r;
}

inline SolveResult solve_auto(const Instance& inst, const Matching& mu, const SolveOptions& opt = {}) {
  return solve_with(Algorithm::automatic, inst, mu, opt);
}

}  // namespace reform
