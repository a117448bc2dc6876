#include <gtest/gtest.h>

#include <numeric>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace reform;
using fixtures::step;

namespace {

std::vector<ExchangeStep> ex1_sequence(const Instance& inst) {
  return {step(inst, "1", "x", "r"), step(inst, "2", "y", "q"), step(inst, "1", "r", "p")};
}

void expect_valid_to_reformist(const Instance& inst, const Matching& mu, const SolveResult& r, std::uint64_t seed) {
  ASSERT_TRUE(r.solved()) << "seed " << seed;
  const auto check = verify_sequence(inst, *r.sequence);
  EXPECT_TRUE(check.valid) << "seed " << seed << ": " << check.reason;
  EXPECT_EQ(check.final_matching, reformist_matching(inst, mu)) << "seed " << seed;
  EXPECT_EQ(*r.length, r.sequence->length());
}

std::size_t bfs_length(const Instance& inst, const Matching& mu) { return *bfs_shortest(inst, mu).length; }

}  // namespace

TEST(Bfs, ExampleShortestSequence) {
  const auto f = fixtures::ex1();
  const auto r = bfs_shortest(f.instance, f.initial);
  ASSERT_TRUE(r.solved());
  EXPECT_EQ(*r.length, 3u);
  EXPECT_EQ(r.sequence->steps, ex1_sequence(f.instance));
}

TEST(Bfs, MatchesIndependentSearch) {
  for (const auto& c : fixtures::uniqueness_corpus(120)) {
    const auto r = bfs_shortest(c.inst, c.mu);
    expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
    EXPECT_EQ(*r.length, oracle::shortest(c.inst, c.mu)) << "seed " << c.seed;
  }
}

TEST(Bfs, ReportsBudgetExhaustion) {
  const auto g = gen_exponential_gap(5);
  const auto r = bfs_shortest(g.instance, g.initial, 2);
  EXPECT_EQ(r.status, SolveStatus::budget_exhausted);
  EXPECT_FALSE(r.length.has_value());
  EXPECT_STREQ(to_string(r.status), "budget");
}

TEST(Deg3, EveryAgentMovesOnceAndMatchesBfs) {
  for (const auto& c : fixtures::deg3_corpus(100)) {
    const auto r = shortest_deg3(c.inst, c.mu);
    expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
    EXPECT_EQ(*r.length, c.inst.num_agents()) << "seed " << c.seed;
    EXPECT_EQ(*r.length, bfs_length(c.inst, c.mu)) << "seed " << c.seed;
  }
}

TEST(Deg3, RejectsLongListsAndRawInstances) {
  const auto f = fixtures::ex1();
  EXPECT_THROW(shortest_deg3(f.instance, f.initial), InvalidInput);  // agent 1 has four items
  // Lists of length ≤ 3 that still need trimming.
  Instance raw({"1"}, {"a", "b", "c"}, {{0, 1, 2}});
  EXPECT_THROW(shortest_deg3(raw, Matching({1})), InvalidInput);
}

TEST(TwoAcceptor, MatchesBfsWithDecreasingMeasure) {
  for (const auto& c : fixtures::two_acceptor_corpus(150)) {
    const auto r = shortest_two_acceptor(c.inst, c.mu);
    expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
    EXPECT_EQ(*r.length, bfs_length(c.inst, c.mu)) << "seed " << c.seed;
    const auto& trace = r.stats.measure_trace;
    ASSERT_FALSE(trace.empty());
    for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LT(trace[k], trace[k - 1]) << "seed " << c.seed;
  }
}

TEST(TwoAcceptor, ExampleAndGapFamily) {
  const auto f = fixtures::ex1();
  const auto r = shortest_two_acceptor(f.instance, f.initial);
  ASSERT_TRUE(r.solved());
  EXPECT_EQ(*r.length, 3u);
  for (std::size_t p = 2; p <= 6; ++p) {
    const auto g = gen_exponential_gap(p);
    const auto rep = preprocess(g.instance, g.initial);
    const auto s = shortest_two_acceptor(rep.reduced, rep.reduced_initial);
    ASSERT_TRUE(s.solved());
    EXPECT_LE(*s.length, 4u);
    EXPECT_EQ(*s.length, bfs_length(g.instance, g.initial));
  }
}

TEST(TwoAcceptor, RejectsThirdAcceptor) {
  Instance inst({"1", "2", "3"}, {"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {0, 3}});
  EXPECT_THROW(shortest_two_acceptor(inst, Matching({1, 2, 3})), InvalidInput);
}

TEST(GeneralizedProblem, MatchesBfsOverGroupedTargets) {
  std::size_t solved = 0;
  std::size_t infeasible = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const auto g = gen_random(n, n + seed % 5, 2 + seed % 4, seed, 2);
    std::mt19937_64 rng(seed * 7 + 1);
    std::vector<Item> targets;
    for (Agent i = 0; static_cast<std::size_t>(i) < n; ++i) {
      auto list = g.instance.prefs(i);
      targets.push_back(list[rng() % list.size()]);
    }
    std::vector<Agent> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<Agent>> groups;
    for (Agent a : perm) {
      if (groups.empty() || rng() % 2) {
        groups.push_back({a});
      } else {
        groups.back().push_back(a);
      }
    }
    const GeneralizedInstance gi{g.instance, g.initial, targets, groups};
    const auto want = oracle::generalized_shortest(g.instance, oracle::items(g.initial), targets, groups);
    const auto r = solve_general_LN(gi);
    ASSERT_EQ(r.solved(), want.has_value()) << "seed " << seed;
    if (!want) {
      ++infeasible;
      continue;
    }
    ++solved;
    EXPECT_EQ(*r.length, *want) << "seed " << seed;
    const auto check = verify_generalized_sequence(gi, *r.sequence);
    EXPECT_TRUE(check.valid && check.complete) << "seed " << seed << ": " << check.reason;
  }
  EXPECT_GT(solved, 300u);
  EXPECT_GT(infeasible, 0u);
}

TEST(GeneralizedProblem, RejectsGroupEnvyAtStart) {
  // Agent 2 envies agent 1 (same group) in the initial matching.
  Instance inst({"1", "2"}, {"a", "b"}, {{0, 1}, {0, 1}});
  const GeneralizedInstance gi{inst, Matching({0, 1}), {0, 0}, {{0, 1}}};
  EXPECT_THROW(solve_general_LN(gi), InvalidInput);
  // Different groups, but agent 2's group is unsatisfied.
  const GeneralizedInstance split{inst, Matching({0, 1}), {0, 0}, {{0}, {1}}};
  EXPECT_THROW(solve_general_LN(split), InvalidInput);
}

TEST(FptLength, MatchesBfsWithinNodeBound) {
  auto corpus = fixtures::deg3_corpus(60);
  auto more = fixtures::two_acceptor_corpus(100);
  corpus.insert(corpus.end(), more.begin(), more.end());
  for (const auto& c : corpus) {
    const std::size_t best = bfs_length(c.inst, c.mu);
    const auto r = fpt_by_length(c.inst, c.mu, best);
    expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
    EXPECT_EQ(*r.length, best) << "seed " << c.seed;
    EXPECT_LE(r.stats.nodes, saturating_pow(c.inst.num_agents(), best));
    const auto below = fpt_by_length(c.inst, c.mu, best - 1);
    EXPECT_EQ(below.status, SolveStatus::infeasible) << "seed " << c.seed;
    const auto above = fpt_by_length(c.inst, c.mu, best + 2);
    ASSERT_TRUE(above.solved());
    EXPECT_EQ(*above.length, best);
  }
}

TEST(FptLength, BelowAgentCountIsInfeasibleWithoutSearch) {
  const auto f = fixtures::ex1();
  const auto r = fpt_by_length(f.instance, f.initial, 1);
  EXPECT_EQ(r.status, SolveStatus::infeasible);
  EXPECT_EQ(r.stats.nodes, 0u);
  EXPECT_EQ(fpt_by_length(f.instance, f.initial, 2).status, SolveStatus::infeasible);
  EXPECT_EQ(*fpt_by_length(f.instance, f.initial, 3).length, 3u);
}

TEST(FptK, MatchesBfsWithinDepthBound) {
  auto corpus = fixtures::deg3_corpus(100);
  auto more = fixtures::two_acceptor_corpus(150);
  corpus.insert(corpus.end(), more.begin(), more.end());
  std::size_t used = 0;
  for (const auto& c : corpus) {
    const auto k = intermediate_items(c.inst, c.mu, reformist_matching(c.inst, c.mu)).size();
    if (k > 4) continue;
    ++used;
    const auto r = fpt_by_intermediate(c.inst, c.mu);
    expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
    EXPECT_EQ(*r.length, bfs_length(c.inst, c.mu)) << "seed " << c.seed;
    EXPECT_LE(r.stats.max_depth, k);
  }
  EXPECT_GT(used, 100u);
}

TEST(FptK, IntermediateItemsOfExample) {
  const auto f = fixtures::ex1();
  const auto k = intermediate_items(f.instance, f.initial, reformist_matching(f.instance, f.initial));
  EXPECT_EQ(k, std::vector<Item>{*f.instance.find_item("r")});
}

TEST(Dispatch, ExampleGoesToTwoAcceptor) {
  const auto f = fixtures::ex1();
  const auto r = solve_auto(f.instance, f.initial);
  ASSERT_TRUE(r.solved());
  EXPECT_EQ(r.stats.solver, "two_acceptor");
  EXPECT_EQ(r.sequence->steps, ex1_sequence(f.instance));
  ASSERT_EQ(r.stats.dispatch_log.size(), 2u);
  EXPECT_EQ(r.stats.dispatch_log[1], "two-acceptor: selected");
}

TEST(Dispatch, EveryAlgorithmAgreesOnRawInstances) {
  for (const auto& c : fixtures::uniqueness_corpus(80)) {
    const std::size_t best = oracle::shortest(c.inst, c.mu);
    for (auto algo : {Algorithm::automatic, Algorithm::bfs, Algorithm::fpt_length, Algorithm::fpt_k}) {
      const auto r = solve_with(algo, c.inst, c.mu);
      expect_valid_to_reformist(c.inst, c.mu, r, c.seed);
      EXPECT_EQ(*r.length, best) << "seed " << c.seed;
    }
  }
}

TEST(Dispatch, GapFamilyNeedsAtMostFourSteps) {
  for (std::size_t p = 2; p <= 6; ++p) {
    const auto g = gen_exponential_gap(p);
    const auto r = solve_auto(g.instance, g.initial);
    ASSERT_TRUE(r.solved());
    EXPECT_LE(*r.length, 4u);
    // p = 2 leaves lists of three items, which the deg3 solver takes first.
    EXPECT_EQ(r.stats.solver, p == 2 ? "deg3" : "two_acceptor") << "p=" << p;
  }
}

TEST(Dispatch, VertexCoverOnK4FallsThroughToIntermediateItems) {
  const auto g = gen_vertex_cover(complete_graph(4));
  const auto r = solve_auto(g.instance, g.initial);
  ASSERT_TRUE(r.solved());
  EXPECT_EQ(r.stats.solver, "fpt_k");
  // Minimum vertex cover of K4 has three vertices.
  EXPECT_EQ(*r.length, *g.certificate.predicted_length(3));
}

TEST(Dispatch, ReportsWhenNothingFits) {
  const auto g = gen_vertex_cover(complete_graph(4));
  SolveOptions opt;
  opt.k_cap = 0;
  opt.bfs_budget = 1;
  opt.length_node_budget = 1;
  EXPECT_THROW(solve_auto(g.instance, g.initial, opt), NoSolverApplicable);
}

TEST(Dispatch, ReformistInputIsEmptySequence) {
  const auto f = fixtures::ex1();
  const Matching sigma = reformist_matching(f.instance, f.initial);
  const auto r = solve_auto(f.instance, sigma);
  ASSERT_TRUE(r.solved());
  EXPECT_EQ(*r.length, 0u);
}

TEST(Dispatch, ParsesAlgorithmNames) {
  EXPECT_EQ(parse_algorithm("auto"), Algorithm::automatic);
  EXPECT_EQ(parse_algorithm("two-acceptor"), Algorithm::two_acceptor);
  EXPECT_EQ(parse_algorithm("fpt-k"), Algorithm::fpt_k);
  EXPECT_FALSE(parse_algorithm("dijkstra").has_value());
}
