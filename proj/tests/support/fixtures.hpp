#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "reform/io.hpp"
#include "reform/reform.hpp"

namespace fixtures {

using namespace reform;

inline std::string data(const std::string& name) { return std::string(REFORM_DATA_DIR) + "/" + name; }

/// Two agents over x, y, p, q, r with μ = (x, y).
inline io::InstanceFile ex1() { return io::load_instance(data("ex1.json")); }

/// Four agents over a..g with μ = (b, d, g, e); not envy-free.
inline io::InstanceFile figure1() { return io::load_instance(data("figure1.json")); }

inline ExchangeStep step(const Instance& inst, const std::string& agent, const std::string& from,
                         const std::string& to) {
  return {*inst.find_agent(agent), *inst.find_item(from), *inst.find_item(to)};
}

struct Case {
  Instance inst;
  Matching mu;
  std::uint64_t seed = 0;
};

/// Random envy-free instances with n ≤ 6, m ≤ 10 and lists of length ≤ 6.
inline std::vector<Case> uniqueness_corpus(std::size_t count = 200) {
  std::vector<Case> out;
  for (std::uint64_t seed = 1; out.size() < count; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const std::size_t m = std::min<std::size_t>(10, n + 1 + seed % 5);
    const std::size_t len = 2 + seed % 5;
    auto g = gen_random(n, m, len, seed);
    out.push_back({std::move(g.instance), std::move(g.initial), seed});
  }
  return out;
}

/// Preprocessed instances (n ≤ 6, at least one agent) drawn from random
/// instances with the given list length and acceptor cap.
inline std::vector<Case> reduced_corpus(std::size_t count, std::size_t max_len, std::size_t max_acceptors,
                                        std::uint64_t salt) {
  std::vector<Case> out;
  for (std::uint64_t k = 0; out.size() < count; ++k) {
    const std::uint64_t seed = salt * 1'000'003 + k;
    const std::size_t n = 2 + k % 5;
    const std::size_t m = n + 1 + (k / 5) % 5;
    auto g = gen_random(n, m, max_len, seed, max_acceptors);
    auto rep = preprocess(g.instance, g.initial);
    if (rep.reduced.num_agents() == 0 || rep.reduced.num_agents() > 6) continue;
    out.push_back({std::move(rep.reduced), std::move(rep.reduced_initial), seed});
  }
  return out;
}

/// Preprocessed by construction: agent i's list runs from r_i through up to
/// max_len - 2 shared intermediate items down to her initial item s_i.
/// Draws whose reformist matching is not (r_1, ..., r_n) are skipped.
inline std::vector<Case> banded_corpus(std::size_t count, std::size_t max_len, std::size_t max_acceptors,
                                       std::uint64_t salt) {
  std::vector<Case> out;
  for (std::uint64_t t = 0; out.size() < count; ++t) {
    const std::uint64_t seed = salt * 1'000'003 + t;
    std::mt19937_64 rng(seed);
    const std::size_t n = 2 + t % 5;
    const std::size_t k = (t / 5) % 4;
    const std::size_t m = 2 * n + k;  // r_i = i, s_i = n + i, then k free items
    std::vector<std::size_t> load(m, 1);
    std::vector<std::vector<Item>> lists(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      std::vector<Item> pool;
      for (std::size_t x = 0; x < m; ++x) {
        const bool own_or_held = x == i || (x >= n && x < 2 * n);
        if (!own_or_held && (max_acceptors == 0 || load[x] < max_acceptors)) pool.push_back(static_cast<Item>(x));
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(std::min(pool.size(), std::uniform_int_distribution<std::size_t>(0, max_len - 2)(rng)));
      lists[i].push_back(static_cast<Item>(i));
      for (Item x : pool) {
        ++load[static_cast<std::size_t>(x)];
        lists[i].push_back(x);
      }
      lists[i].push_back(static_cast<Item>(n + i));
    }
    Instance inst = Instance::from_prefs(m, lists);
    std::vector<Item> s(n);
    std::iota(s.begin(), s.end(), static_cast<Item>(n));
    Matching mu(s);
    const Matching sigma = reformist_matching(inst, mu);
    bool tops = true;
    for (std::size_t i = 0; i < n; ++i) tops = tops && sigma[static_cast<Agent>(i)] == static_cast<Item>(i);
    if (!tops || !is_preprocessed(inst, mu, sigma)) continue;
    out.push_back({std::move(inst), std::move(mu), seed});
  }
  return out;
}

/// A third reduced from raw random instances, the rest built banded.
inline std::vector<Case> mixed_corpus(std::size_t count, std::size_t max_len, std::size_t max_acceptors,
                                      std::uint64_t salt) {
  auto out = reduced_corpus(count / 3, max_len, max_acceptors, salt);
  auto banded = banded_corpus(count - out.size(), max_len, max_acceptors, salt);
  out.insert(out.end(), std::make_move_iterator(banded.begin()), std::make_move_iterator(banded.end()));
  return out;
}

/// Preprocessed instances with every list of length ≤ 3.
inline std::vector<Case> deg3_corpus(std::size_t count = 300) { return mixed_corpus(count, 3, 0, 3); }

/// Preprocessed instances with every item acceptable to ≤ 2 agents.
inline std::vector<Case> two_acceptor_corpus(std::size_t count = 500) { return mixed_corpus(count, 6, 2, 2); }

/// best-first, round-robin, then a mix of shuffled fixed orders, shuffled
/// round-robin orders and random nominations.
inline std::vector<NominationPolicy> policies(std::size_t n, std::uint64_t seed, std::size_t count) {
  std::vector<NominationPolicy> out{NominationPolicy::best_first(), NominationPolicy::round_robin()};
  std::mt19937_64 rng(seed);
  std::vector<Agent> order(n);
  std::iota(order.begin(), order.end(), 0);
  while (out.size() < count) {
    std::shuffle(order.begin(), order.end(), rng);
    switch (out.size() % 3) {
      case 0: out.push_back(NominationPolicy::fixed_order(order)); break;
      case 1: out.push_back(NominationPolicy::round_robin(order)); break;
      default: out.push_back(NominationPolicy::random(rng())); break;
    }
  }
  return out;
}

}  // namespace fixtures
