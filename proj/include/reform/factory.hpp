#pragma once

// Instance generators: the exponential-gap family, the three reduction
// families with their certificate sequences, and seeded random instances.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "reform/core.hpp"
#include "reform/engine.hpp"

namespace reform {

// ---------------------------------------------------------------------------
// Source objects
// ---------------------------------------------------------------------------

/// Simple undirected graph on dense vertices 0..n-1. `labels[v]` is the
/// external name of vertex v; edges are stored with first < second, sorted.
struct Graph {
  std::vector<int> labels;
  std::vector<std::pair<int, int>> edges;

  [[nodiscard]] std::size_t num_vertices() const noexcept { return labels.size(); }

  /// Incident edge indices of v, ascending.
  [[nodiscard]] std::vector<std::size_t> incident(int v) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].first == v || edges[e].second == v) out.push_back(e);
    }
    return out;
  }

  [[nodiscard]] std::optional<int> index_of(int label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<int>(it - labels.begin());
  }
};

/// Builds a graph from labelled edges; vertices are the labels that occur,
/// ascending. Rejects loops and parallel edges.
inline Graph make_graph(const std::vector<std::pair<int, int>>& labelled_edges, std::vector<int> extra_vertices = {}) {
  std::set<int> vs(extra_vertices.begin(), extra_vertices.end());
  for (auto [u, v] : labelled_edges) {
    vs.insert(u);
    vs.insert(v);
  }
  Graph g;
  g.labels.assign(vs.begin(), vs.end());
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : labelled_edges) {
    if (u == v) throw InvalidInput("graph has a loop at vertex " + std::to_string(u));
    int a = *g.index_of(u);
    int b = *g.index_of(v);
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) {
      throw InvalidInput("graph has a repeated edge " + std::to_string(u) + "-" + std::to_string(v));
    }
    g.edges.emplace_back(a, b);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 1; u <= n; ++u) {
    for (int v = u + 1; v <= n; ++v) edges.emplace_back(u, v);
  }
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 1);
  return make_graph(edges, all);
}

/// Family of subsets of a ground set. Elements are dense 0..|V|-1 with
/// external labels; each set is sorted and duplicate-free.
struct SetFamily {
  std::vector<int> labels;
  std::vector<std::vector<int>> sets;

  [[nodiscard]] std::size_t total_size() const {
    std::size_t t = 0;
    for (const auto& s : sets) t += s.size();
    return t;
  }
  /// δ(v): indices of the sets containing v, ascending.
  [[nodiscard]] std::vector<std::size_t> containing(int v) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (std::binary_search(sets[j].begin(), sets[j].end(), v)) out.push_back(j);
    }
    return out;
  }
};

inline SetFamily make_set_family(const std::vector<std::vector<int>>& labelled_sets) {
  std::set<int> ground;
  for (const auto& s : labelled_sets) ground.insert(s.begin(), s.end());
  SetFamily f;
  f.labels.assign(ground.begin(), ground.end());
  for (const auto& s : labelled_sets) {
    if (s.empty()) throw InvalidInput("set family contains an empty set");
    std::vector<int> dense;
    for (int x : s) {
      dense.push_back(static_cast<int>(std::lower_bound(f.labels.begin(), f.labels.end(), x) - f.labels.begin()));
    }
    std::sort(dense.begin(), dense.end());
    if (std::adjacent_find(dense.begin(), dense.end()) != dense.end()) {
      throw InvalidInput("set lists an element twice");
    }
    f.sets.push_back(std::move(dense));
  }
  if (f.sets.empty()) throw InvalidInput("set family is empty");
  return f;
}

/// k-partite graph: `part[v]` in 0..k-1 for every vertex.
struct PartitionedGraph {
  Graph graph;
  std::vector<int> part;
  int k = 0;
};

/// `parts` lists vertex labels per part. Every vertex must be in exactly one
/// part and no edge may join two vertices of the same part.
inline PartitionedGraph make_partitioned_graph(Graph g, const std::vector<std::vector<int>>& parts) {
  PartitionedGraph pg{std::move(g), {}, static_cast<int>(parts.size())};
  pg.part.assign(pg.graph.num_vertices(), -1);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (int label : parts[i]) {
      auto v = pg.graph.index_of(label);
      if (!v) throw InvalidInput("part lists unknown vertex " + std::to_string(label));
      if (pg.part[static_cast<std::size_t>(*v)] != -1) throw InvalidInput("vertex " + std::to_string(label) + " in two parts");
      pg.part[static_cast<std::size_t>(*v)] = static_cast<int>(i);
    }
  }
  for (std::size_t v = 0; v < pg.part.size(); ++v) {
    if (pg.part[v] == -1) throw InvalidInput("vertex " + std::to_string(pg.graph.labels[v]) + " is in no part");
  }
  for (auto [u, v] : pg.graph.edges) {
    if (pg.part[static_cast<std::size_t>(u)] == pg.part[static_cast<std::size_t>(v)]) {
      throw InvalidInput("edge inside part " + std::to_string(pg.part[static_cast<std::size_t>(u)] + 1));
    }
  }
  return pg;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct RandomParams {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t max_len = 0;
  std::uint64_t seed = 0;
  std::size_t max_acceptors = 0;
};

struct ReductionCertificate {
  enum class Family { exponential_gap, vertex_cover, set_cover, multicolored_clique, random };
  Family family = Family::random;
  std::variant<std::monostate, Graph, SetFamily, PartitionedGraph, RandomParams> source;
  std::size_t p = 0;  // gadget size for the gap families
  std::size_t num_agents = 0;

  /// Closed-form length of the certificate sequence for a witness of size k
  /// (cover size, or the clique size for the clique family). nullopt for
  /// random instances.
  [[nodiscard]] std::optional<std::size_t> predicted_length(std::size_t k) const {
    switch (family) {
      case Family::exponential_gap: return 4;
      case Family::vertex_cover: return num_agents + std::get<Graph>(source).edges.size() + k;
      case Family::set_cover: {
        const auto& f = std::get<SetFamily>(source);
        return (2 * p - 4) * k + 2 * f.total_size() + 4 * f.sets.size() + f.labels.size() + 1;
      }
      case Family::multicolored_clique: return num_agents + k * (k - 1) / 2 + k;
      case Family::random: return std::nullopt;
    }
    return std::nullopt;
  }
};

inline const char* to_string(ReductionCertificate::Family f) {
  using F = ReductionCertificate::Family;
  switch (f) {
    case F::exponential_gap: return "exponential-gap";
    case F::vertex_cover: return "vertex-cover";
    case F::set_cover: return "set-cover";
    case F::multicolored_clique: return "multicolored-clique";
    case F::random: return "random";
  }
  return "?";
}

struct GeneratedInstance {
  Instance instance;
  Matching initial;
  ReductionCertificate certificate;
};

namespace detail {

/// Collects named agents and items in creation order.
class InstanceBuilder {
 public:
  Item item(const std::string& name) {
    auto [it, inserted] = items_.emplace(name, static_cast<Item>(item_names_.size()));
    if (inserted) item_names_.push_back(name);
    return it->second;
  }

  /// Adds an agent whose list is the given item names; repeated entries keep
  /// their first position. The last entry is her initial item.
  Agent agent(const std::string& name, const std::vector<std::string>& list) {
    std::vector<Item> prefs;
    for (const auto& x : list) {
      const Item id = item(x);
      if (std::find(prefs.begin(), prefs.end(), id) == prefs.end()) prefs.push_back(id);
    }
    agent_names_.push_back(name);
    initial_.push_back(prefs.back());
    prefs_.push_back(std::move(prefs));
    return static_cast<Agent>(agent_names_.size() - 1);
  }

  GeneratedInstance finish(ReductionCertificate cert) {
    cert.num_agents = agent_names_.size();
    return {Instance(agent_names_, item_names_, prefs_), Matching(initial_), std::move(cert)};
  }

 private:
  std::map<std::string, Item> items_;
  std::vector<std::string> item_names_;
  std::vector<std::string> agent_names_;
  std::vector<std::vector<Item>> prefs_;
  std::vector<Item> initial_;
};

/// Appends steps by name, applying each to a running matching.
class SequenceBuilder {
 public:
  SequenceBuilder(const GeneratedInstance& gen) : inst_(gen.instance), seq_{gen.initial, {}, {}}, cur_(gen.initial) {}

  void move(const std::string& agent, const std::string& to, const std::string& label) {
    const auto i = inst_.find_agent(agent);
    const auto y = inst_.find_item(to);
    if (!i || !y) throw InternalError("certificate refers to unknown name " + agent + " / " + to);
    seq_.steps.push_back({*i, cur_[*i], *y});
    seq_.labels.push_back(label);
    cur_.assign(*i, *y);
  }

  ReformSequence finish() { return std::move(seq_); }

 private:
  const Instance& inst_;
  ReformSequence seq_;
  Matching cur_;
};

inline std::string r_of(const std::string& agent) { return "r[" + agent + "]"; }
inline std::string s_of(const std::string& agent) { return "s[" + agent + "]"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Exponential gap
// ---------------------------------------------------------------------------

/// Three agents, items a1..ap, b1..bp, r, s, z; μ = (a1, b1, s) and the
/// reformist matching is (ap, bp, r).
inline GeneratedInstance gen_exponential_gap(std::size_t p) {
  if (p < 2) throw InvalidInput("exponential-gap family needs p >= 2");
  auto a = [](std::size_t l) { return "a" + std::to_string(l); };
  auto b = [](std::size_t l) { return "b" + std::to_string(l); };
  detail::InstanceBuilder ib;
  for (std::size_t l = 1; l <= p; ++l) ib.item(a(l));
  for (std::size_t l = 1; l <= p; ++l) ib.item(b(l));
  for (const char* x : {"r", "s", "z"}) ib.item(x);

  std::vector<std::string> l1;
  for (std::size_t l = p; l >= 2; --l) {
    l1.push_back(a(l));
    l1.push_back(b(l));
  }
  l1.push_back(a(1));
  std::vector<std::string> l2{b(p), "z"};
  for (std::size_t l = p - 1; l >= 2; --l) {
    l2.push_back(b(l));
    l2.push_back(a(l + 1));
  }
  l2.push_back(b(1));
  ib.agent("1", l1);
  ib.agent("2", l2);
  ib.agent("3", {"r", "z", "s"});
  ReductionCertificate cert;
  cert.family = ReductionCertificate::Family::exponential_gap;
  cert.p = p;
  return ib.finish(std::move(cert));
}

/// The four-step sequence: 3 s→r, 2 b1→z, 1 a1→ap, 2 z→bp.
inline ReformSequence exp_gap_short_sequence(const GeneratedInstance& gen) {
  const std::string p = std::to_string(gen.certificate.p);
  detail::SequenceBuilder sb(gen);
  sb.move("3", "r", "");
  sb.move("2", "z", "");
  sb.move("1", "a" + p, "");
  sb.move("2", "b" + p, "");
  auto seq = sb.finish();
  seq.labels.clear();
  return seq;
}

// ---------------------------------------------------------------------------
// Vertex cover on 3-regular graphs
// ---------------------------------------------------------------------------

namespace detail {

inline std::string edge_tag(const Graph& g, std::size_t e) {
  return std::to_string(g.labels[static_cast<std::size_t>(g.edges[e].first)]) + "-" +
         std::to_string(g.labels[static_cast<std::size_t>(g.edges[e].second)]);
}
inline std::string vc_edge_agent(const Graph& g, std::size_t e, int l) {
  return "e(" + edge_tag(g, e) + ")^" + std::to_string(l);
}
inline std::string vc_vertex_agent(const Graph& g, int v, int l) {
  return "v(" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + ")^" + std::to_string(l);
}
inline std::string vc_y(const Graph& g, std::size_t e, int v) {
  return "y[e=" + edge_tag(g, e) + ",v=" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + "]";
}
inline std::string vc_x(const Graph& g, int v, std::size_t e) {
  return "x[v=" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + ",e=" + edge_tag(g, e) + "]";
}
inline std::string vc_t(const Graph& g, int v) { return "t[v=" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + "]"; }

/// r item of a vertex-gadget agent; agents 6..8 use the x items.
inline std::string vc_r_vertex(const Graph& g, int v, int l) {
  if (l >= 6) return vc_x(g, v, g.incident(v)[static_cast<std::size_t>(l - 6)]);
  return r_of(vc_vertex_agent(g, v, l));
}

}  // namespace detail

/// Four agents per edge and eight per vertex; μ(i) = s_i. Each edge
/// e = {u, v} is oriented with u the smaller vertex; δ(v) is taken in
/// ascending edge order.
inline GeneratedInstance gen_vertex_cover(const Graph& g) {
  using namespace detail;
  for (int v = 0; static_cast<std::size_t>(v) < g.num_vertices(); ++v) {
    if (g.incident(v).size() != 3) {
      throw InvalidInput("graph is not 3-regular: vertex " + std::to_string(g.labels[static_cast<std::size_t>(v)]) +
                         " has degree " + std::to_string(g.incident(v).size()));
    }
  }
  InstanceBuilder ib;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int u = g.edges[e].first;
    const int v = g.edges[e].second;
    auto ag = [&](int l) { return vc_edge_agent(g, e, l); };
    ib.agent(ag(1), {r_of(ag(1)), vc_y(g, e, v), r_of(ag(2)), s_of(ag(1))});
    ib.agent(ag(2), {r_of(ag(2)), r_of(ag(3)), vc_x(g, v, e), s_of(ag(2))});
    ib.agent(ag(3), {r_of(ag(3)), vc_y(g, e, u), r_of(ag(4)), s_of(ag(3))});
    ib.agent(ag(4), {r_of(ag(4)), r_of(ag(1)), vc_x(g, u, e), s_of(ag(4))});
  }
  for (int v = 0; static_cast<std::size_t>(v) < g.num_vertices(); ++v) {
    const auto d = g.incident(v);
    auto ag = [&](int l) { return vc_vertex_agent(g, v, l); };
    auto r = [&](int l) { return vc_r_vertex(g, v, l); };
    ib.agent(ag(1), {r(1), vc_t(g, v), r(2), s_of(ag(1))});
    ib.agent(ag(2), {r(2), r(3), r(4), s_of(ag(2))});
    ib.agent(ag(3), {r(3), vc_y(g, d[0], v), vc_y(g, d[1], v), s_of(ag(3))});
    ib.agent(ag(4), {r(4), vc_y(g, d[2], v), s_of(ag(4))});
    ib.agent(ag(5), {r(5), r(1), s_of(ag(5))});
    ib.agent(ag(6), {r(6), r(1), s_of(ag(6))});
    ib.agent(ag(7), {r(7), r(5), s_of(ag(7))});
    ib.agent(ag(8), {r(8), r(5), s_of(ag(8))});
  }
  ReductionCertificate cert;
  cert.family = ReductionCertificate::Family::vertex_cover;
  cert.source = g;
  return ib.finish(std::move(cert));
}

/// Five-phase schedule from a vertex cover given by vertex labels.
inline ReformSequence claim1_sequence(const GeneratedInstance& gen, const std::vector<int>& cover) {
  using namespace detail;
  const Graph& g = std::get<Graph>(gen.certificate.source);
  std::vector<char> in_s(g.num_vertices(), 0);
  for (int label : cover) {
    auto v = g.index_of(label);
    if (!v) throw InvalidInput("cover names unknown vertex " + std::to_string(label));
    in_s[static_cast<std::size_t>(*v)] = 1;
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!in_s[static_cast<std::size_t>(g.edges[e].first)] && !in_s[static_cast<std::size_t>(g.edges[e].second)]) {
      throw InvalidInput("not a vertex cover: edge " + edge_tag(g, e) + " is uncovered");
    }
  }
  const int nv = static_cast<int>(g.num_vertices());
  SequenceBuilder sb(gen);
  for (int v = 0; v < nv; ++v) {
    if (!in_s[static_cast<std::size_t>(v)]) continue;
    sb.move(vc_vertex_agent(g, v, 1), vc_t(g, v), "phase 1");
    for (int l = 2; l <= 4; ++l) sb.move(vc_vertex_agent(g, v, l), vc_r_vertex(g, v, l), "phase 1");
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int u = g.edges[e].first;
    const int v = g.edges[e].second;
    // Enter through the y item of a covered endpoint; prefer v.
    const bool via_v = in_s[static_cast<std::size_t>(v)] != 0;
    const int first = via_v ? 1 : 3;
    const std::string y = via_v ? vc_y(g, e, v) : vc_y(g, e, u);
    sb.move(vc_edge_agent(g, e, first), y, "phase 2");
    for (int k = 1; k <= 3; ++k) {
      const int l = (first - 1 + k) % 4 + 1;
      sb.move(vc_edge_agent(g, e, l), r_of(vc_edge_agent(g, e, l)), "phase 2");
    }
    sb.move(vc_edge_agent(g, e, first), r_of(vc_edge_agent(g, e, first)), "phase 2");
  }
  for (int v = 0; v < nv; ++v) {
    for (int l = 6; l <= 8; ++l) sb.move(vc_vertex_agent(g, v, l), vc_r_vertex(g, v, l), "phase 3");
    sb.move(vc_vertex_agent(g, v, 5), vc_r_vertex(g, v, 5), "phase 3");
  }
  for (int v = 0; v < nv; ++v) {
    if (in_s[static_cast<std::size_t>(v)]) sb.move(vc_vertex_agent(g, v, 1), vc_r_vertex(g, v, 1), "phase 4");
  }
  for (int v = 0; v < nv; ++v) {
    if (in_s[static_cast<std::size_t>(v)]) continue;
    for (int l = 1; l <= 4; ++l) sb.move(vc_vertex_agent(g, v, l), vc_r_vertex(g, v, l), "phase 5");
  }
  return sb.finish();
}

// ---------------------------------------------------------------------------
// Set cover
// ---------------------------------------------------------------------------

namespace detail {

inline std::string sc_x(std::size_t j, std::size_t l) {
  return "x(" + std::to_string(j + 1) + "," + std::to_string(l) + ")";
}
inline std::string sc_y(std::size_t j) { return "y(" + std::to_string(j + 1) + ")"; }
inline std::string sc_y2(std::size_t j) { return "y'(" + std::to_string(j + 1) + ")"; }
inline std::string sc_v(const SetFamily& f, int v, std::size_t l) {
  return "v(" + std::to_string(f.labels[static_cast<std::size_t>(v)]) + ")^" + std::to_string(l);
}
inline std::string sc_t(const SetFamily& f, std::size_t j, int v) {
  return "t[S=" + std::to_string(j + 1) + ",v=" + std::to_string(f.labels[static_cast<std::size_t>(v)]) + "]";
}
inline std::string sc_u(std::size_t j) { return "u[S=" + std::to_string(j + 1) + "]"; }
inline std::string sc_a(std::size_t j, std::size_t l) { return "a[S=" + std::to_string(j + 1) + "," + std::to_string(l) + "]"; }
inline std::string sc_b(std::size_t j, std::size_t l) { return "b[S=" + std::to_string(j + 1) + "," + std::to_string(l) + "]"; }

}  // namespace detail

/// Agents x(j,0..d_j), y(j), y'(j) per set, v^1..v^{f_v} per element and one
/// agent z; μ(i) = s_i. The y agents reuse the exponential-gap lists with
/// u_j in the place of z, so their r and s items are a/b items.
inline GeneratedInstance gen_set_cover(const SetFamily& f, std::size_t p) {
  using namespace detail;
  if (p < 2) throw InvalidInput("set-cover family needs p >= 2");
  const std::size_t h = f.sets.size();
  InstanceBuilder ib;
  for (std::size_t j = 0; j < h; ++j) {
    const auto& s = f.sets[j];
    std::vector<std::string> l0{r_of(sc_x(j, 0)), sc_u(j)};
    for (std::size_t l = s.size(); l >= 1; --l) l0.push_back(r_of(sc_x(j, l)));
    l0.push_back(s_of(sc_x(j, 0)));
    ib.agent(sc_x(j, 0), l0);
    for (std::size_t l = 1; l <= s.size(); ++l) {
      ib.agent(sc_x(j, l), {r_of(sc_x(j, l)), sc_t(f, j, s[l - 1]), s_of(sc_x(j, l))});
    }
    std::vector<std::string> ly;
    for (std::size_t l = p; l >= 2; --l) {
      ly.push_back(sc_a(j, l));
      ly.push_back(sc_b(j, l));
    }
    ly.push_back(sc_a(j, 1));
    std::vector<std::string> ly2{sc_b(j, p), sc_u(j)};
    for (std::size_t l = p - 1; l >= 2; --l) {
      ly2.push_back(sc_b(j, l));
      ly2.push_back(sc_a(j, l + 1));
    }
    ly2.push_back(sc_b(j, 1));
    ib.agent(sc_y(j), ly);
    ib.agent(sc_y2(j), ly2);
  }
  for (int v = 0; static_cast<std::size_t>(v) < f.labels.size(); ++v) {
    const auto d = f.containing(v);
    for (std::size_t l = 1; l <= d.size(); ++l) {
      const std::size_t next = l % d.size() + 1;
      ib.agent(sc_v(f, v, l), {r_of(sc_v(f, v, l)), sc_t(f, d[l - 1], v), r_of(sc_v(f, v, next)), s_of(sc_v(f, v, l))});
    }
  }
  std::vector<std::string> lz{r_of("z")};
  for (std::size_t j = 0; j < h; ++j) lz.push_back(r_of(sc_x(j, 0)));
  lz.push_back(s_of("z"));
  ib.agent("z", lz);
  ReductionCertificate cert;
  cert.family = ReductionCertificate::Family::set_cover;
  cert.source = f;
  cert.p = p;
  return ib.finish(std::move(cert));
}

/// Five-phase schedule from a set cover given by 1-based set indices.
inline ReformSequence claim3_sequence(const GeneratedInstance& gen, const std::vector<std::size_t>& cover) {
  using namespace detail;
  const SetFamily& f = std::get<SetFamily>(gen.certificate.source);
  const std::size_t p = gen.certificate.p;
  const std::size_t h = f.sets.size();
  std::vector<char> chosen(h, 0);
  for (std::size_t j : cover) {
    if (j < 1 || j > h) throw InvalidInput("cover names unknown set " + std::to_string(j));
    chosen[j - 1] = 1;
  }
  for (int v = 0; static_cast<std::size_t>(v) < f.labels.size(); ++v) {
    const auto d = f.containing(v);
    if (std::none_of(d.begin(), d.end(), [&](std::size_t j) { return chosen[j] != 0; })) {
      throw InvalidInput("not a set cover: element " + std::to_string(f.labels[static_cast<std::size_t>(v)]) +
                         " is uncovered");
    }
  }
  SequenceBuilder sb(gen);
  for (std::size_t j = 0; j < h; ++j) {
    if (!chosen[j]) continue;
    for (std::size_t l = 2; l <= p; ++l) {
      sb.move(sc_y(j), sc_a(j, l), "phase 1");
      sb.move(sc_y2(j), sc_b(j, l), "phase 1");
    }
    sb.move(sc_x(j, 0), sc_u(j), "phase 1");
    for (std::size_t l = 1; l <= f.sets[j].size(); ++l) sb.move(sc_x(j, l), r_of(sc_x(j, l)), "phase 1");
  }
  for (int v = 0; static_cast<std::size_t>(v) < f.labels.size(); ++v) {
    const auto d = f.containing(v);
    std::size_t c = 0;
    while (!chosen[d[c]]) ++c;
    sb.move(sc_v(f, v, c + 1), sc_t(f, d[c], v), "phase 2");
    for (std::size_t k = 1; k < d.size(); ++k) {
      const std::size_t l = (c + k) % d.size() + 1;
      sb.move(sc_v(f, v, l), r_of(sc_v(f, v, l)), "phase 2");
    }
    sb.move(sc_v(f, v, c + 1), r_of(sc_v(f, v, c + 1)), "phase 2");
  }
  sb.move("z", r_of("z"), "phase 3");
  for (std::size_t j = 0; j < h; ++j) {
    if (chosen[j]) {
      sb.move(sc_x(j, 0), r_of(sc_x(j, 0)), "phase 4");
    } else {
      for (std::size_t l = 0; l <= f.sets[j].size(); ++l) sb.move(sc_x(j, l), r_of(sc_x(j, l)), "phase 4");
    }
  }
  for (std::size_t j = 0; j < h; ++j) {
    if (chosen[j]) continue;
    sb.move(sc_y2(j), sc_u(j), "phase 5");
    sb.move(sc_y(j), sc_a(j, p), "phase 5");
    sb.move(sc_y2(j), sc_b(j, p), "phase 5");
  }
  return sb.finish();
}

// ---------------------------------------------------------------------------
// Multicolored clique
// ---------------------------------------------------------------------------

namespace detail {

inline std::string mc_v(const Graph& g, int v, std::size_t l) {
  return "v(" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + ")^" + std::to_string(l);
}
inline std::string mc_e(const Graph& g, std::size_t e) { return "e(" + edge_tag(g, e) + ")"; }
inline std::string mc_y(const Graph& g, std::size_t e) { return "y[e=" + edge_tag(g, e) + "]"; }
inline std::string mc_z(const Graph& g, int v) { return "z[v=" + std::to_string(g.labels[static_cast<std::size_t>(v)]) + "]"; }

/// E[V_i, V_j] for i < j, each in ascending edge order.
inline std::vector<std::vector<std::size_t>> edge_classes(const PartitionedGraph& pg) {
  std::vector<std::vector<std::size_t>> out;
  for (int i = 0; i < pg.k; ++i) {
    for (int j = i + 1; j < pg.k; ++j) {
      std::vector<std::size_t> cls;
      for (std::size_t e = 0; e < pg.graph.edges.size(); ++e) {
        const int a = pg.part[static_cast<std::size_t>(pg.graph.edges[e].first)];
        const int b = pg.part[static_cast<std::size_t>(pg.graph.edges[e].second)];
        if (std::min(a, b) == i && std::max(a, b) == j) cls.push_back(e);
      }
      out.push_back(std::move(cls));
    }
  }
  return out;
}

}  // namespace detail

/// d_j + 1 agents per vertex, one per edge and one agent a; μ(i) = s_i.
inline GeneratedInstance gen_multicolored_clique(const PartitionedGraph& pg) {
  using namespace detail;
  const Graph& g = pg.graph;
  InstanceBuilder ib;
  for (int v = 0; static_cast<std::size_t>(v) < g.num_vertices(); ++v) {
    const auto d = g.incident(v);
    for (std::size_t l = 1; l <= d.size(); ++l) {
      ib.agent(mc_v(g, v, l), {r_of(mc_v(g, v, l)), mc_y(g, d[l - 1]), s_of(mc_v(g, v, l))});
    }
    std::vector<std::string> l0{r_of(mc_v(g, v, 0)), mc_z(g, v)};
    for (std::size_t l = d.size(); l >= 1; --l) l0.push_back(r_of(mc_v(g, v, l)));
    l0.push_back(s_of(mc_v(g, v, 0)));
    ib.agent(mc_v(g, v, 0), l0);
  }
  for (const auto& cls : edge_classes(pg)) {
    for (std::size_t l = 0; l < cls.size(); ++l) {
      const std::size_t e = cls[l];
      const std::size_t next = cls[(l + 1) % cls.size()];
      ib.agent(mc_e(g, e), {r_of(mc_e(g, e)), mc_y(g, e), r_of(mc_e(g, next)), r_of("a"), s_of(mc_e(g, e))});
    }
  }
  std::vector<std::string> la{r_of("a")};
  for (int v = static_cast<int>(g.num_vertices()) - 1; v >= 0; --v) la.push_back(r_of(mc_v(g, v, 0)));
  la.push_back(s_of("a"));
  ib.agent("a", la);
  ReductionCertificate cert;
  cert.family = ReductionCertificate::Family::multicolored_clique;
  cert.source = pg;
  return ib.finish(std::move(cert));
}

/// Five-phase schedule from a multicolored clique given by vertex labels.
inline ReformSequence clique_sequence(const GeneratedInstance& gen, const std::vector<int>& clique) {
  using namespace detail;
  const PartitionedGraph& pg = std::get<PartitionedGraph>(gen.certificate.source);
  const Graph& g = pg.graph;
  std::vector<char> in_x(g.num_vertices(), 0);
  std::vector<int> per_part(static_cast<std::size_t>(pg.k), 0);
  for (int label : clique) {
    auto v = g.index_of(label);
    if (!v) throw InvalidInput("clique names unknown vertex " + std::to_string(label));
    if (in_x[static_cast<std::size_t>(*v)]) throw InvalidInput("clique lists vertex " + std::to_string(label) + " twice");
    in_x[static_cast<std::size_t>(*v)] = 1;
    ++per_part[static_cast<std::size_t>(pg.part[static_cast<std::size_t>(*v)])];
  }
  if (std::any_of(per_part.begin(), per_part.end(), [](int c) { return c != 1; })) {
    throw InvalidInput("not a multicolored clique: need exactly one vertex per part");
  }
  const auto classes = edge_classes(pg);
  std::vector<std::size_t> pick;
  for (const auto& cls : classes) {
    auto it = std::find_if(cls.begin(), cls.end(), [&](std::size_t e) {
      return in_x[static_cast<std::size_t>(g.edges[e].first)] && in_x[static_cast<std::size_t>(g.edges[e].second)];
    });
    if (it == cls.end()) throw InvalidInput("not a multicolored clique: a pair of parts has no clique edge");
    pick.push_back(static_cast<std::size_t>(it - cls.begin()));
  }

  SequenceBuilder sb(gen);
  const int nv = static_cast<int>(g.num_vertices());
  for (int v = 0; v < nv; ++v) {
    if (!in_x[static_cast<std::size_t>(v)]) continue;
    sb.move(mc_v(g, v, 0), mc_z(g, v), "phase 1");
    for (std::size_t l = 1; l <= g.incident(v).size(); ++l) sb.move(mc_v(g, v, l), r_of(mc_v(g, v, l)), "phase 1");
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cls = classes[c];
    const std::size_t first = cls[pick[c]];
    sb.move(mc_e(g, first), mc_y(g, first), "phase 2");
    for (std::size_t k = 1; k < cls.size(); ++k) {
      const std::size_t e = cls[(pick[c] + k) % cls.size()];
      sb.move(mc_e(g, e), r_of(mc_e(g, e)), "phase 2");
    }
    sb.move(mc_e(g, first), r_of(mc_e(g, first)), "phase 2");
  }
  sb.move("a", r_of("a"), "phase 3");
  for (int v = 0; v < nv; ++v) {
    if (in_x[static_cast<std::size_t>(v)]) sb.move(mc_v(g, v, 0), r_of(mc_v(g, v, 0)), "phase 4");
  }
  for (int v = 0; v < nv; ++v) {
    if (in_x[static_cast<std::size_t>(v)]) continue;
    for (std::size_t l = 0; l <= g.incident(v).size(); ++l) sb.move(mc_v(g, v, l), r_of(mc_v(g, v, l)), "phase 5");
  }
  return sb.finish();
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

inline constexpr std::size_t kRandomRetries = 10'000;

/// n agents named "1".."n", m items named "0".."m-1", each list of length
/// 1..max_len. With max_acceptors > 0 no item is listed by more agents than
/// that. μ gives every agent, in a random order, her least preferred item
/// still free; lists of agents that end up unassigned or envious are redrawn
/// until μ is envy-free.
inline GeneratedInstance gen_random(std::size_t n, std::size_t m, std::size_t max_len, std::uint64_t seed,
                                    std::size_t max_acceptors = 0) {
  if (m < n) throw InvalidInput("random instances need m >= n");
  if (max_len == 0) throw InvalidInput("max_len must be positive");
  if (max_acceptors != 0 && max_acceptors * m < n) throw InvalidInput("acceptor cap too small for n agents");
  max_len = std::min(max_len, m);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Item>> lists(n);
  std::vector<std::size_t> load(m, 0);

  auto draw = [&](std::size_t i) {
    for (Item x : lists[i]) --load[static_cast<std::size_t>(x)];
    std::vector<Item> pool;
    for (std::size_t x = 0; x < m; ++x) {
      if (max_acceptors == 0 || load[x] < max_acceptors) pool.push_back(static_cast<Item>(x));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
    pool.resize(std::min(len, pool.size()));
    for (Item x : pool) ++load[static_cast<std::size_t>(x)];
    lists[i] = std::move(pool);
  };
  for (std::size_t i = 0; i < n; ++i) draw(i);

  for (std::size_t attempt = 0; attempt < kRandomRetries; ++attempt) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Item> assigned(n, kNoItem);
    std::vector<char> taken(m, 0);
    std::vector<std::size_t> redraw;
    for (std::size_t i : order) {
      for (auto it = lists[i].rbegin(); it != lists[i].rend(); ++it) {
        if (!taken[static_cast<std::size_t>(*it)]) {
          assigned[i] = *it;
          taken[static_cast<std::size_t>(*it)] = 1;
          break;
        }
      }
      if (assigned[i] == kNoItem) redraw.push_back(i);
    }
    if (redraw.empty()) {
      Instance inst = Instance::from_prefs(m, lists);
      Matching mu(assigned);
      auto pairs = envy_pairs(inst, mu);
      if (pairs.empty()) {
        ReductionCertificate cert;
        cert.family = ReductionCertificate::Family::random;
        cert.source = RandomParams{n, m, max_len, seed, max_acceptors};
        cert.num_agents = n;
        return {std::move(inst), std::move(mu), std::move(cert)};
      }
      for (auto [i, j] : pairs) redraw.push_back(static_cast<std::size_t>(i));
      std::sort(redraw.begin(), redraw.end());
      redraw.erase(std::unique(redraw.begin(), redraw.end()), redraw.end());
    }
    // Local repair can cycle under an acceptor cap; start over now and then.
    if (attempt % 64 == 63) {
      redraw.resize(n);
      std::iota(redraw.begin(), redraw.end(), 0);
    }
    for (std::size_t i : redraw) draw(i);
  }
  throw ReformError("random generator gave up after " + std::to_string(kRandomRetries) + " attempts");
}

}  // namespace reform
