#pragma once

// File formats: JSON instance and sequence files, DOT export of the item
// graph, and the small text formats used for reduction sources.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reform/core.hpp"
#include "reform/factory.hpp"

namespace reform::io {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Malformed text: bad syntax, unknown fields, unresolved names. `line` and
/// `column` are 1-based and 0 when unknown; `where` is a JSON pointer.
class ParseError : public ReformError {
 public:
  ParseError(std::string message, std::string where = {}, std::size_t line = 0, std::size_t column = 0)
      : ReformError(format(message, where, line, column)), where_(std::move(where)), line_(line), column_(column) {}

  [[nodiscard]] const std::string& where() const noexcept { return where_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, const std::string& where, std::size_t line,
                            std::size_t column) {
    std::string out;
    if (line != 0) out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    out += message;
    if (!where.empty()) out += " (at " + where + ")";
    return out;
  }

  std::string where_;
  std::size_t line_;
  std::size_t column_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReformError("cannot write " + path);
  out << text;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < offset; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline ordered_json parse_json(std::string_view text) {
  try {
    return ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // byte is the 1-based offset of the offending character.
    auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ParseError(what, {}, line, col);
  }
}

inline void only_fields(const ordered_json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError("expected an object", where.empty() ? "/" : where);
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ParseError("unknown field '" + key + "'", where + "/" + key);
    }
  }
}

inline const ordered_json& field(const ordered_json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", where.empty() ? "/" : where);
  return *it;
}

inline std::string as_string(const ordered_json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError("expected a string", where);
  return v.get<std::string>();
}

inline void check_version(const ordered_json& doc) {
  const auto& v = field(doc, "", "version");
  if (!v.is_number_integer() || v.get<long long>() != kFormatVersion) {
    throw ParseError("unsupported version, expected " + std::to_string(kFormatVersion), "/version");
  }
}

template <class Lookup>
Matching parse_matching_object(const ordered_json& obj, const std::string& where, const Instance& inst,
                               Lookup item_of) {
  if (!obj.is_object()) throw ParseError("expected an object", where);
  std::vector<Item> assignment(inst.num_agents(), kNoItem);
  for (const auto& [agent, item] : obj.items()) {
    auto i = inst.find_agent(agent);
    if (!i) throw ParseError("unknown agent '" + agent + "'", where + "/" + agent);
    assignment[static_cast<std::size_t>(*i)] = item_of(as_string(item, where + "/" + agent), where + "/" + agent);
  }
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    if (assignment[static_cast<std::size_t>(i)] == kNoItem) {
      throw ParseError("no item for agent '" + inst.agent_name(i) + "'", where);
    }
  }
  return Matching(std::move(assignment));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance files
// ---------------------------------------------------------------------------

struct InstanceFile {
  Instance instance;
  Matching initial;
  friend bool operator==(const InstanceFile&, const InstanceFile&) = default;
};

inline ordered_json matching_to_json(const Instance& inst, const Matching& mu) {
  ordered_json m = ordered_json::object();
  for (Agent i = 0; static_cast<std::size_t>(i) < mu.size(); ++i) m[inst.agent_name(i)] = inst.item_name(mu[i]);
  return m;
}

inline ordered_json instance_to_json(const Instance& inst) {
  ordered_json doc;
  doc["version"] = kFormatVersion;
  doc["items"] = inst.item_names();
  ordered_json agents = ordered_json::array();
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    ordered_json prefs = ordered_json::array();
    for (Item x : inst.prefs(i)) prefs.push_back(inst.item_name(x));
    agents.push_back({{"name", inst.agent_name(i)}, {"prefs", std::move(prefs)}});
  }
  doc["agents"] = std::move(agents);
  return doc;
}

inline std::string dump_instance(const InstanceFile& f) {
  ordered_json doc = instance_to_json(f.instance);
  doc["initial_matching"] = matching_to_json(f.instance, f.initial);
  return doc.dump(2) + "\n";
}

/// Digest of the instance part of a file (items and lists, not the matching).
inline std::string instance_hash(const Instance& inst) {
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(instance_to_json(inst).dump());
  return ss.str();
}

/// Parses an instance file. Structural problems throw ParseError; a list
/// that repeats an item or a matching that is not a matching are left for
/// validate_instance / validate_matching to report.
inline InstanceFile parse_instance(std::string_view text) {
  using namespace detail;
  const ordered_json doc = parse_json(text);
  only_fields(doc, "", {"version", "items", "agents", "initial_matching"});
  check_version(doc);

  const auto& items = field(doc, "", "items");
  if (!items.is_array()) throw ParseError("expected an array", "/items");
  std::vector<std::string> item_names;
  std::map<std::string, Item> item_id;
  for (std::size_t k = 0; k < items.size(); ++k) {
    item_names.push_back(as_string(items[k], "/items/" + std::to_string(k)));
    item_id.emplace(item_names.back(), static_cast<Item>(k));
  }
  auto item_of = [&](const std::string& name, const std::string& where) {
    auto it = item_id.find(name);
    if (it == item_id.end()) throw ParseError("unknown item '" + name + "'", where);
    return it->second;
  };

  const auto& agents = field(doc, "", "agents");
  if (!agents.is_array()) throw ParseError("expected an array", "/agents");
  std::vector<std::string> agent_names;
  std::vector<std::vector<Item>> prefs;
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const std::string where = "/agents/" + std::to_string(k);
    only_fields(agents[k], where, {"name", "prefs"});
    agent_names.push_back(as_string(field(agents[k], where, "name"), where + "/name"));
    const auto& list = field(agents[k], where, "prefs");
    if (!list.is_array()) throw ParseError("expected an array", where + "/prefs");
    std::vector<Item> ids;
    for (std::size_t r = 0; r < list.size(); ++r) {
      const std::string w = where + "/prefs/" + std::to_string(r);
      ids.push_back(item_of(as_string(list[r], w), w));
    }
    prefs.push_back(std::move(ids));
  }
  Instance inst(std::move(agent_names), std::move(item_names), std::move(prefs));
  Matching mu = parse_matching_object(field(doc, "", "initial_matching"), "/initial_matching", inst, item_of);
  return {std::move(inst), std::move(mu)};
}

inline InstanceFile load_instance(const std::string& path) { return parse_instance(read_file(path)); }

inline void save_instance(const std::string& path, const InstanceFile& f) { write_file(path, dump_instance(f)); }

// ---------------------------------------------------------------------------
// Sequence files
// ---------------------------------------------------------------------------

struct SequenceFile {
  std::string instance_path;
  std::string instance_hash;
  std::optional<Matching> initial;  // unset: the instance file's matching
  std::vector<ExchangeStep> steps;
  std::vector<std::string> labels;  // empty or one per step

  /// Resolves against the instance the file refers to.
  [[nodiscard]] ReformSequence to_sequence(const InstanceFile& f) const {
    return {initial.value_or(f.initial), steps, labels};
  }
};

inline std::string dump_sequence(const Instance& inst, const ReformSequence& seq, const std::string& instance_path,
                                 bool write_initial = true) {
  ordered_json doc;
  doc["version"] = kFormatVersion;
  doc["instance"] = {{"path", instance_path}, {"hash", instance_hash(inst)}};
  if (write_initial) doc["initial_matching"] = matching_to_json(inst, seq.initial);
  ordered_json steps = ordered_json::array();
  for (std::size_t t = 0; t < seq.steps.size(); ++t) {
    const auto& s = seq.steps[t];
    ordered_json step{{"agent", inst.agent_name(s.agent)},
                      {"from", inst.item_name(s.from_item)},
                      {"to", inst.item_name(s.to_item)}};
    if (t < seq.labels.size() && !seq.labels[t].empty()) step["phase"] = seq.labels[t];
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  return doc.dump(2) + "\n";
}

/// Names are resolved against `inst`; the stored hash is returned as-is so
/// the caller decides how to treat a mismatch.
inline SequenceFile parse_sequence(std::string_view text, const Instance& inst) {
  using namespace detail;
  const ordered_json doc = parse_json(text);
  only_fields(doc, "", {"version", "instance", "initial_matching", "steps"});
  check_version(doc);
  SequenceFile out;
  if (auto it = doc.find("instance"); it != doc.end()) {
    only_fields(*it, "/instance", {"path", "hash"});
    if (auto p = it->find("path"); p != it->end()) out.instance_path = as_string(*p, "/instance/path");
    if (auto h = it->find("hash"); h != it->end()) out.instance_hash = as_string(*h, "/instance/hash");
  }
  auto item_of = [&](const std::string& name, const std::string& where) {
    auto x = inst.find_item(name);
    if (!x) throw ParseError("unknown item '" + name + "'", where);
    return *x;
  };
  if (auto it = doc.find("initial_matching"); it != doc.end()) {
    out.initial = parse_matching_object(*it, "/initial_matching", inst, item_of);
  }
  const auto& steps = field(doc, "", "steps");
  if (!steps.is_array()) throw ParseError("expected an array", "/steps");
  bool any_label = false;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const std::string where = "/steps/" + std::to_string(t);
    only_fields(steps[t], where, {"agent", "from", "to", "phase"});
    const std::string agent = as_string(field(steps[t], where, "agent"), where + "/agent");
    auto i = inst.find_agent(agent);
    if (!i) throw ParseError("unknown agent '" + agent + "'", where + "/agent");
    const Item from = item_of(as_string(field(steps[t], where, "from"), where + "/from"), where + "/from");
    const Item to = item_of(as_string(field(steps[t], where, "to"), where + "/to"), where + "/to");
    out.steps.push_back({*i, from, to});
    std::string label;
    if (auto p = steps[t].find("phase"); p != steps[t].end()) {
      label = as_string(*p, where + "/phase");
      any_label = true;
    }
    out.labels.push_back(std::move(label));
  }
  if (!any_label) out.labels.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Matching and list arguments
// ---------------------------------------------------------------------------

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    std::string part(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    out.push_back(std::move(part));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

/// "r,q" (items in agent order) or "1=r,2=q" (every agent named once).
inline Matching parse_matching_arg(const Instance& inst, std::string_view spec) {
  const auto parts = split(spec, ',');
  std::vector<Item> assignment(inst.num_agents(), kNoItem);
  const bool named = spec.find('=') != std::string_view::npos;
  if (!named && parts.size() != inst.num_agents()) {
    throw ParseError("matching lists " + std::to_string(parts.size()) + " items for " +
                     std::to_string(inst.num_agents()) + " agents");
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::string agent_name;
    std::string item_name = parts[k];
    Agent i = static_cast<Agent>(k);
    if (named) {
      const auto eq = parts[k].find('=');
      if (eq == std::string::npos) throw ParseError("expected agent=item, got '" + parts[k] + "'");
      agent_name = parts[k].substr(0, eq);
      item_name = parts[k].substr(eq + 1);
      auto a = inst.find_agent(agent_name);
      if (!a) throw ParseError("unknown agent '" + agent_name + "'");
      i = *a;
      if (assignment[static_cast<std::size_t>(i)] != kNoItem) throw ParseError("agent '" + agent_name + "' named twice");
    }
    auto x = inst.find_item(item_name);
    if (!x) throw ParseError("unknown item '" + item_name + "'");
    assignment[static_cast<std::size_t>(i)] = *x;
  }
  for (Agent i = 0; static_cast<std::size_t>(i) < inst.num_agents(); ++i) {
    if (assignment[static_cast<std::size_t>(i)] == kNoItem) {
      throw ParseError("no item for agent '" + inst.agent_name(i) + "'");
    }
  }
  return Matching(std::move(assignment));
}

inline int parse_int(const std::string& tok, const std::string& context) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("expected an integer, got '" + tok + "'" + (context.empty() ? "" : " in " + context));
  }
}

inline std::vector<int> parse_int_list(std::string_view s, char sep = ',') {
  std::vector<int> out;
  for (const auto& tok : split(s, sep)) {
    if (!tok.empty()) out.push_back(parse_int(tok, std::string(s)));
  }
  return out;
}

/// Whitespace-separated integers per line; '#' starts a comment. Returns the
/// non-empty lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::vector<int>>> int_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<int>>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<int> vals;
    std::string tok;
    std::size_t col = 1;
    while (ls >> tok) {
      col = line.find(tok, col - 1) + 1;
      try {
        vals.push_back(parse_int(tok, {}));
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()), {}, no, col);
      }
    }
    if (!vals.empty()) out.emplace_back(no, std::move(vals));
  }
  return out;
}

/// One "u v" pair per line.
inline Graph parse_edge_list(std::string_view text) {
  std::vector<std::pair<int, int>> edges;
  for (auto& [no, vals] : int_lines(text)) {
    if (vals.size() != 2) throw ParseError("expected two vertices", {}, no, 1);
    edges.emplace_back(vals[0], vals[1]);
  }
  return make_graph(edges);
}

/// One set per line.
inline SetFamily parse_set_family(std::string_view text) {
  std::vector<std::vector<int>> sets;
  for (auto& [no, vals] : int_lines(text)) sets.push_back(std::move(vals));
  return make_set_family(sets);
}

/// "1,2;3;4,5": parts separated by ';', vertices by ','.
inline std::vector<std::vector<int>> parse_parts(std::string_view s) {
  std::vector<std::vector<int>> parts;
  for (const auto& p : split(s, ';')) parts.push_back(parse_int_list(p));
  return parts;
}

/// Graph file: JSON {"version": 1, "edges": [[u, v], ...], "parts": [[...], ...]}
/// or a plain edge list. Parts, when present, are returned separately.
struct GraphFile {
  Graph graph;
  std::optional<std::vector<std::vector<int>>> parts;
};

inline GraphFile parse_graph_file(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos || text[first] != '{') return {parse_edge_list(text), std::nullopt};
  using namespace detail;
  const ordered_json doc = parse_json(text);
  only_fields(doc, "", {"version", "vertices", "edges", "parts"});
  check_version(doc);
  auto int_at = [](const ordered_json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError("expected an integer", where);
    return v.get<int>();
  };
  std::vector<int> vertices;
  if (auto it = doc.find("vertices"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("expected an array", "/vertices");
    for (std::size_t k = 0; k < it->size(); ++k) vertices.push_back(int_at((*it)[k], "/vertices/" + std::to_string(k)));
  }
  const auto& edges = field(doc, "", "edges");
  if (!edges.is_array()) throw ParseError("expected an array", "/edges");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "/edges/" + std::to_string(k);
    if (!edges[k].is_array() || edges[k].size() != 2) throw ParseError("expected [u, v]", where);
    pairs.emplace_back(int_at(edges[k][0], where + "/0"), int_at(edges[k][1], where + "/1"));
  }
  GraphFile out{make_graph(pairs, vertices), std::nullopt};
  if (auto it = doc.find("parts"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("expected an array", "/parts");
    std::vector<std::vector<int>> parts;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "/parts/" + std::to_string(k);
      if (!(*it)[k].is_array()) throw ParseError("expected an array", where);
      std::vector<int> part;
      for (std::size_t r = 0; r < (*it)[k].size(); ++r) part.push_back(int_at((*it)[k][r], where + "/" + std::to_string(r)));
      parts.push_back(std::move(part));
    }
    out.parts = std::move(parts);
  }
  return out;
}

// ---------------------------------------------------------------------------
// DOT
// ---------------------------------------------------------------------------

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string dot_quote(std::string_view s) { return "\"" + dot_escape(s) + "\""; }

/// Item graph as a DOT digraph: one vertex per item, one arc per consecutive
/// pair in a list, pointing to the better item and labelled by the agent.
/// With a matching, held items carry their agent as a token.
inline std::string to_dot(const Instance& inst, const std::optional<Matching>& tokens = std::nullopt) {
  const ItemGraph g = build_item_graph(inst);
  std::vector<Agent> holder(inst.num_items(), kNoAgent);
  if (tokens) holder = holders_of(inst.num_items(), *tokens);
  std::ostringstream out;
  out << "digraph items {\n";
  for (Item x = 0; static_cast<std::size_t>(x) < g.num_vertices; ++x) {
    out << "  " << dot_quote(inst.item_name(x));
    const Agent h = holder[static_cast<std::size_t>(x)];
    if (h != kNoAgent) {
      out << " [label=\"" << dot_escape(inst.item_name(x)) << "\\n(" << dot_escape(inst.agent_name(h)) << ")\""
          << ", style=filled, fillcolor=lightgray, xlabel=" << dot_quote(inst.agent_name(h)) << "]";
    }
    out << ";\n";
  }
  for (const auto& a : g.arcs) {
    out << "  " << dot_quote(inst.item_name(a.tail)) << " -> " << dot_quote(inst.item_name(a.head))
        << " [label=" << dot_quote(inst.agent_name(a.label)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace reform::io
