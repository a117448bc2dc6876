#pragma once

// Command implementations behind the reform CLI. Each returns the process
// exit status: 0 ok, 1 domain failure, 2 usage or parse error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reform/io.hpp"
#include "reform/reform.hpp"

namespace reform::cli {

inline constexpr int kOk = 0;
inline constexpr int kDomainFailure = 1;
inline constexpr int kUsage = 2;

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

/// Thrown for bad flag combinations found after argument parsing.
class UsageError : public ReformError {
 public:
  using ReformError::ReformError;
};

inline std::string show_matching(const Instance& inst, const Matching& mu) {
  std::string s;
  for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) {
    if (i != 0) s += ' ';
    s += inst.agent_name(i) + "=" + inst.item_name(mu[i]);
  }
  return s;
}

inline std::string show_step(const Instance& inst, const ExchangeStep& s) {
  return "(" + inst.agent_name(s.agent) + ":" + inst.item_name(s.from_item) + "->" + inst.item_name(s.to_item) + ")";
}

inline void print_steps(std::ostream& out, const Instance& inst, const ReformSequence& seq) {
  for (std::size_t t = 0; t < seq.steps.size(); ++t) {
    out << "  " << t + 1 << ". " << show_step(inst, seq.steps[t]);
    if (t < seq.labels.size() && !seq.labels[t].empty()) out << "  [" << seq.labels[t] << "]";
    out << "\n";
  }
}

inline std::vector<Agent> agents_by_name(const Instance& inst, const std::string& list) {
  std::vector<Agent> out;
  for (const auto& name : io::split(list, ',')) {
    auto i = inst.find_agent(name);
    if (!i) throw UsageError("policy names unknown agent '" + name + "'");
    out.push_back(*i);
  }
  return out;
}

/// best-first | round-robin | random | order:a,b,c | cycle:a,b,c
inline NominationPolicy parse_policy(const Instance& inst, const std::string& spec, std::optional<std::uint64_t> seed) {
  if (spec == "best-first") return NominationPolicy::best_first();
  if (spec == "round-robin") return NominationPolicy::round_robin();
  if (spec == "random") {
    if (!seed) throw UsageError("--policy random needs --seed");
    return NominationPolicy::random(*seed);
  }
  if (spec.rfind("order:", 0) == 0) return NominationPolicy::fixed_order(agents_by_name(inst, spec.substr(6)));
  if (spec.rfind("cycle:", 0) == 0) return NominationPolicy::round_robin(agents_by_name(inst, spec.substr(6)));
  throw UsageError("unknown policy '" + spec + "'");
}

/// Instance valid and the matching a matching; reports problems otherwise.
inline bool check_file(const io::InstanceFile& f, Streams s) {
  bool ok = true;
  for (const auto& v : validate_instance(f.instance)) {
    s.out << "invalid instance: " << v.message << "\n";
    ok = false;
  }
  if (!ok) return false;
  for (const auto& p : validate_matching(f.instance, f.initial)) {
    s.out << "invalid matching: " << p << "\n";
    ok = false;
  }
  return ok;
}

inline bool check_envy_free(const io::InstanceFile& f, Streams s) {
  const auto pairs = envy_pairs(f.instance, f.initial);
  for (auto [i, j] : pairs) {
    s.out << "envy (" << f.instance.agent_name(i) << "," << f.instance.agent_name(j) << "): "
          << f.instance.agent_name(i) << " prefers " << f.instance.item_name(f.initial[j]) << " to "
          << f.instance.item_name(f.initial[i]) << "\n";
  }
  return pairs.empty();
}

inline int cmd_validate(const std::string& path, Streams s = {}) {
  const auto f = io::load_instance(path);
  if (!check_file(f, s) || !check_envy_free(f, s)) return kDomainFailure;
  s.out << "ok: " << f.instance.num_agents() << " agents, " << f.instance.num_items()
        << " items, initial matching envy-free\n";
  return kOk;
}

struct ReformArgs {
  std::string path;
  std::string policy = "best-first";
  std::optional<std::uint64_t> seed;
  std::string out;
};

inline int cmd_reform(const ReformArgs& a, Streams s = {}) {
  const auto f = io::load_instance(a.path);
  if (!check_file(f, s) || !check_envy_free(f, s)) return kDomainFailure;
  const auto policy = parse_policy(f.instance, a.policy, a.seed);
  const auto r = compute_reformist(f.instance, f.initial, policy);
  s.out << "steps " << r.sequence.length() << "\n";
  print_steps(s.out, f.instance, r.sequence);
  s.out << "final " << show_matching(f.instance, r.reformist) << "\n";
  if (!a.out.empty()) io::write_file(a.out, io::dump_sequence(f.instance, r.sequence, a.path));
  return kOk;
}

struct ShortestArgs {
  std::string path;
  std::string algo = "auto";
  std::optional<std::size_t> budget;
  std::optional<std::size_t> decision;
  std::string out;
  bool explain = false;
};

inline int cmd_shortest(const ShortestArgs& a, Streams s = {}) {
  const auto algo = parse_algorithm(a.algo);
  if (!algo) throw UsageError("unknown algorithm '" + a.algo + "'");
  if (a.decision && *algo != Algorithm::fpt_length) throw UsageError("--decision needs --algo fpt-length");
  const auto f = io::load_instance(a.path);
  if (!check_file(f, s) || !check_envy_free(f, s)) return kDomainFailure;
  SolveOptions opt;
  if (a.budget) {
    opt.bfs_budget = *a.budget;
    opt.length_node_budget = *a.budget;
  }
  opt.decision = a.decision;
  SolveResult r;
  try {
    r = solve_with(*algo, f.instance, f.initial, opt);
  } catch (const NoSolverApplicable& e) {
    s.out << "unsolved: " << e.what() << "\n";
    return kDomainFailure;
  }
  if (a.explain) {
    for (const auto& line : r.stats.dispatch_log) s.out << "# " << line << "\n";
    s.out << "# solver " << r.stats.solver << ", nodes " << r.stats.nodes << "\n";
  }
  if (!r.solved()) {
    s.out << (r.status == SolveStatus::infeasible ? "infeasible" : "budget exhausted") << "\n";
    return kDomainFailure;
  }
  s.out << "length " << *r.length << "\n";
  print_steps(s.out, f.instance, *r.sequence);
  if (!a.out.empty()) io::write_file(a.out, io::dump_sequence(f.instance, *r.sequence, a.path));
  return kOk;
}

/// Prints yes/no; the status is 0 for yes and 1 for no.
inline int cmd_reachable(const std::string& path, const std::string& target, Streams s = {}) {
  const auto f = io::load_instance(path);
  if (!check_file(f, s) || !check_envy_free(f, s)) return kDomainFailure;
  const Matching tau = io::parse_matching_arg(f.instance, target);
  if (auto p = validate_matching(f.instance, tau); !p.empty()) {
    s.out << "invalid target: " << p.front() << "\n";
    return kDomainFailure;
  }
  const bool yes = is_reachable(f.instance, f.initial, tau);
  s.out << (yes ? "yes" : "no") << "\n";
  return yes ? kOk : kDomainFailure;
}

struct GenArgs {
  std::string family;
  std::optional<std::size_t> p;
  std::string graph;
  std::optional<int> complete;
  std::string sets;
  std::string parts;
  std::string witness;
  std::optional<std::size_t> n, m, max_len, max_acceptors;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string sequence_out;
};

inline int cmd_gen(const GenArgs& a, Streams s = {}) {
  auto need = [&](bool present, const char* flag) {
    if (!present) throw UsageError("family " + a.family + " needs " + flag);
  };
  auto load_graph = [&]() -> io::GraphFile {
    if (a.complete) return {complete_graph(*a.complete), std::nullopt};
    need(!a.graph.empty(), "--graph or --complete");
    return io::parse_graph_file(io::read_file(a.graph));
  };
  const bool want_sequence = !a.sequence_out.empty();
  if (want_sequence && a.witness.empty() && a.family != "exponential-gap") {
    throw UsageError("--sequence-out needs --witness");
  }

  GeneratedInstance gen;
  std::optional<ReformSequence> seq;
  if (a.family == "exponential-gap") {
    need(a.p.has_value(), "--p");
    gen = gen_exponential_gap(*a.p);
    if (want_sequence) seq = exp_gap_short_sequence(gen);
  } else if (a.family == "vertex-cover") {
    gen = gen_vertex_cover(load_graph().graph);
    if (want_sequence) seq = claim1_sequence(gen, io::parse_int_list(a.witness));
  } else if (a.family == "set-cover") {
    need(!a.sets.empty(), "--sets");
    need(a.p.has_value(), "--p");
    gen = gen_set_cover(io::parse_set_family(io::read_file(a.sets)), *a.p);
    if (want_sequence) {
      std::vector<std::size_t> cover;
      for (int j : io::parse_int_list(a.witness)) {
        if (j < 1) throw UsageError("set indices start at 1");
        cover.push_back(static_cast<std::size_t>(j));
      }
      seq = claim3_sequence(gen, cover);
    }
  } else if (a.family == "multicolored-clique") {
    auto gf = load_graph();
    std::vector<std::vector<int>> parts;
    if (!a.parts.empty()) {
      parts = io::parse_parts(a.parts);
    } else if (gf.parts) {
      parts = *gf.parts;
    } else if (a.complete) {
      for (int v : gf.graph.labels) parts.push_back({v});
    } else {
      throw UsageError("family multicolored-clique needs --parts");
    }
    gen = gen_multicolored_clique(make_partitioned_graph(std::move(gf.graph), parts));
    if (want_sequence) seq = clique_sequence(gen, io::parse_int_list(a.witness));
  } else if (a.family == "random") {
    need(a.n && a.m && a.max_len, "--n, --m and --max-len");
    need(a.seed.has_value(), "--seed");
    gen = gen_random(*a.n, *a.m, *a.max_len, *a.seed, a.max_acceptors.value_or(0));
    if (want_sequence) throw UsageError("random instances have no certificate sequence");
  } else {
    throw UsageError("unknown family '" + a.family + "'");
  }

  const std::string text = io::dump_instance({gen.instance, gen.initial});
  if (a.out.empty()) {
    s.out << text;
  } else {
    io::write_file(a.out, text);
  }
  s.err << to_string(gen.certificate.family) << ": " << gen.instance.num_agents() << " agents, "
        << gen.instance.num_items() << " items\n";
  if (seq) {
    const auto check = verify_sequence(gen.instance, *seq);
    if (!check.valid) {
      s.err << "certificate sequence rejected at step " << check.failing_step.value_or(0) + 1 << ": " << check.reason
            << "\n";
      return kDomainFailure;
    }
    io::write_file(a.sequence_out, io::dump_sequence(gen.instance, *seq, a.out.empty() ? "-" : a.out));
    s.err << "certificate sequence: " << seq->length() << " steps\n";
  }
  return kOk;
}

/// `matching` empty: no tokens; "initial": the file's matching; otherwise a
/// matching argument.
inline int cmd_export_dot(const std::string& path, const std::string& matching, const std::string& out,
                          Streams s = {}) {
  const auto f = io::load_instance(path);
  if (auto v = validate_instance(f.instance); !v.empty()) {
    s.err << "invalid instance: " << v.front().message << "\n";
    return kDomainFailure;
  }
  std::optional<Matching> tokens;
  if (matching == "initial") {
    tokens = f.initial;
  } else if (!matching.empty()) {
    tokens = io::parse_matching_arg(f.instance, matching);
  }
  if (tokens) {
    if (auto p = validate_matching(f.instance, *tokens); !p.empty()) {
      s.err << "invalid matching: " << p.front() << "\n";
      return kDomainFailure;
    }
  }
  const std::string dot = io::to_dot(f.instance, tokens);
  if (out.empty()) {
    s.out << dot;
  } else {
    io::write_file(out, dot);
  }
  return kOk;
}

inline int cmd_verify(const std::string& instance_path, const std::string& sequence_path, Streams s = {}) {
  const auto f = io::load_instance(instance_path);
  const auto sf = io::parse_sequence(io::read_file(sequence_path), f.instance);
  if (!sf.instance_hash.empty() && sf.instance_hash != io::instance_hash(f.instance)) {
    throw io::ParseError("sequence was written for a different instance (hash " + sf.instance_hash + ")");
  }
  const ReformSequence seq = sf.to_sequence(f);
  const auto rep = verify_sequence(f.instance, seq);
  if (!rep.valid) {
    if (rep.failing_step) {
      s.out << "invalid at step " << *rep.failing_step + 1 << " " << show_step(f.instance, seq.steps[*rep.failing_step])
            << ": " << rep.reason << "\n";
    } else {
      s.out << "invalid: " << rep.reason << "\n";
    }
    return kDomainFailure;
  }
  s.out << "valid: " << seq.length() << " steps, final " << show_matching(f.instance, rep.final_matching) << "\n";
  s.out << (rep.complete ? "reaches the reformist matching" : "stops before the reformist matching") << "\n";
  return kOk;
}

/// Runs a command body and maps exceptions to exit statuses.
template <class F>
int guarded(F&& body, Streams s = {}) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    s.err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    s.err << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const InternalError& e) {
    s.err << "internal error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const ReformError& e) {
    s.err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

}  // namespace reform::cli
