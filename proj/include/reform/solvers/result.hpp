#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reform/core.hpp"

namespace reform {

enum class SolveStatus { solved, infeasible, budget_exhausted };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::budget_exhausted: return "budget";
  }
  return "?";
}

struct SolveStats {
  std::string solver;
  std::size_t nodes = 0;
  std::size_t max_depth = 0;
  std::size_t recursion_calls = 0;
  /// (L,N) solver only: measure at each recursive call, in call order.
  std::vector<std::size_t> measure_trace;
  /// solve_auto only: one line per solver considered.
  std::vector<std::string> dispatch_log;
};

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  std::optional<std::size_t> length;
  std::optional<ReformSequence> sequence;
  SolveStats stats;

  [[nodiscard]] bool solved() const noexcept { return status == SolveStatus::solved; }

  static SolveResult make_solved(ReformSequence seq, SolveStats stats) {
    SolveResult r;
    r.status = SolveStatus::solved;
    r.length = seq.length();
    r.sequence = std::move(seq);
    r.stats = std::move(stats);
    return r;
  }
  static SolveResult make_failed(SolveStatus status, SolveStats stats) {
    SolveResult r;
    r.status = status;
    r.stats = std::move(stats);
    return r;
  }
};

}  // namespace reform
