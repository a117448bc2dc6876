#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"
#include "support/fixtures.hpp"

using namespace reform;
namespace fs = std::filesystem;

namespace {

/// Scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("reform_cli_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

struct Run {
  int status;
  std::string out;
  std::string err;
};

template <class F>
Run run(F&& body) {
  std::ostringstream out, err;
  cli::Streams s{out, err};
  const int status = cli::guarded([&] { return body(s); }, s);
  return {status, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string write_gap(const TempDir& dir, std::size_t p) {
  const auto g = gen_exponential_gap(p);
  const std::string path = dir.file("gap" + std::to_string(p) + ".json");
  io::save_instance(path, {g.instance, g.initial});
  return path;
}

}  // namespace

TEST(InstanceFile, RoundTripsDataFiles) {
  for (const char* name : {"ex1.json", "figure1.json"}) {
    const auto f = io::load_instance(fixtures::data(name));
    const std::string text = io::dump_instance(f);
    const auto back = io::parse_instance(text);
    EXPECT_EQ(back, f) << name;
    EXPECT_EQ(io::dump_instance(back), text) << name;
  }
}

TEST(InstanceFile, RoundTripsGeneratedInstances) {
  std::vector<GeneratedInstance> gens{gen_exponential_gap(3), gen_vertex_cover(complete_graph(4)),
                                      gen_set_cover(make_set_family({{1, 2}, {2, 3}}), 3),
                                      gen_random(5, 9, 4, 11)};
  for (const auto& g : gens) {
    const io::InstanceFile f{g.instance, g.initial};
    EXPECT_EQ(io::parse_instance(io::dump_instance(f)), f);
    EXPECT_EQ(io::instance_hash(io::parse_instance(io::dump_instance(f)).instance), io::instance_hash(g.instance));
  }
}

TEST(InstanceFile, HashDependsOnLists) {
  const auto f = fixtures::ex1();
  const std::string h = io::instance_hash(f.instance);
  EXPECT_EQ(h.rfind("fnv1a64:", 0), 0u);
  EXPECT_EQ(h.size(), 8u + 16u);
  Instance other({"1", "2"}, {"x", "y", "p", "q", "r"}, {{2, 3, 4, 0}, {3, 2, 1}});
  EXPECT_NE(io::instance_hash(other), h);
  // Reference value of the 64-bit FNV-1a hash.
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
}

TEST(InstanceFile, RejectsUnknownFieldsWithPointer) {
  const std::string text = R"({"version": 1, "items": ["a"], "agents": [{"name": "1", "prefs": ["a"], "color": 3}],
                               "initial_matching": {"1": "a"}})";
  try {
    io::parse_instance(text);
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.where(), "/agents/0/color");
  }
}

TEST(InstanceFile, ReportsLineAndColumnOfSyntaxErrors) {
  const std::string text = "{\n  \"version\": 1,\n  \"items\": [\"a\" \"b\"]\n}\n";
  try {
    io::parse_instance(text);
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    // The position is the last character of the offending token "b".
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 19u);
    EXPECT_NE(std::string(e.what()).find("line 3, column 19"), std::string::npos) << e.what();
  }
}

TEST(InstanceFile, RejectsBadContent) {
  auto where = [](const std::string& text) {
    try {
      io::parse_instance(text);
    } catch (const io::ParseError& e) {
      return e.where();
    }
    return std::string("accepted");
  };
  EXPECT_EQ(where(R"({"version": 2, "items": [], "agents": [], "initial_matching": {}})"), "/version");
  EXPECT_EQ(where(R"({"version": 1, "agents": [], "initial_matching": {}})"), "/");
  EXPECT_EQ(where(R"({"version": 1, "items": ["a"], "agents": [{"name": "1", "prefs": ["b"]}],
                     "initial_matching": {"1": "a"}})"),
            "/agents/0/prefs/0");
  EXPECT_EQ(where(R"({"version": 1, "items": ["a"], "agents": [{"name": "1", "prefs": ["a"]}],
                     "initial_matching": {}})"),
            "/initial_matching");
}

TEST(SequenceFile, RoundTripWithLabels) {
  const auto g = gen_vertex_cover(complete_graph(4));
  const auto seq = claim1_sequence(g, {1, 2, 3});
  const std::string text = io::dump_sequence(g.instance, seq, "vc.json");
  const auto sf = io::parse_sequence(text, g.instance);
  EXPECT_EQ(sf.instance_path, "vc.json");
  EXPECT_EQ(sf.instance_hash, io::instance_hash(g.instance));
  ASSERT_TRUE(sf.initial.has_value());
  EXPECT_EQ(*sf.initial, g.initial);
  const auto back = sf.to_sequence({g.instance, g.initial});
  EXPECT_EQ(back.steps, seq.steps);
  EXPECT_EQ(back.labels, seq.labels);
  EXPECT_EQ(io::dump_sequence(g.instance, back, "vc.json"), text);
}

TEST(SequenceFile, UnlabelledStepsAndMissingInitial) {
  const auto f = fixtures::ex1();
  const std::string text = R"({"version": 1, "steps": [{"agent": "1", "from": "x", "to": "r"}]})";
  const auto sf = io::parse_sequence(text, f.instance);
  EXPECT_FALSE(sf.initial.has_value());
  EXPECT_TRUE(sf.labels.empty());
  ASSERT_EQ(sf.steps.size(), 1u);
  EXPECT_EQ(sf.steps[0], fixtures::step(f.instance, "1", "x", "r"));
  EXPECT_EQ(sf.to_sequence(f).initial, f.initial);
  EXPECT_THROW(io::parse_sequence(R"({"version": 1, "steps": [{"agent": "9", "from": "x", "to": "r"}]})", f.instance),
               io::ParseError);
}

TEST(Arguments, MatchingForms) {
  const auto f = fixtures::ex1();
  const Matching want({*f.instance.find_item("r"), *f.instance.find_item("q")});
  EXPECT_EQ(io::parse_matching_arg(f.instance, "r,q"), want);
  EXPECT_EQ(io::parse_matching_arg(f.instance, "2=q,1=r"), want);
  EXPECT_THROW(io::parse_matching_arg(f.instance, "r"), io::ParseError);
  EXPECT_THROW(io::parse_matching_arg(f.instance, "r,zz"), io::ParseError);
  EXPECT_THROW(io::parse_matching_arg(f.instance, "1=r,1=q"), io::ParseError);
}

TEST(Arguments, SourceFormats) {
  const auto g = io::parse_edge_list("# triangle\n1 2\n2 3\n\n1 3\n");
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.edges.size(), 3u);
  try {
    io::parse_edge_list("1 2\n3\n");
    FAIL() << "expected ParseError";
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  const auto fam = io::parse_set_family(io::read_file(fixtures::data("sets_two.txt")));
  EXPECT_EQ(fam.sets.size(), 2u);
  EXPECT_EQ(fam.labels, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(io::parse_parts("1,2;3"), (std::vector<std::vector<int>>{{1, 2}, {3}}));
  EXPECT_THROW(io::parse_parts("1,x"), io::ParseError);

  const auto gf = io::parse_graph_file(R"({"version": 1, "vertices": [7], "edges": [[1, 2]], "parts": [[1], [2, 7]]})");
  EXPECT_EQ(gf.graph.num_vertices(), 3u);
  ASSERT_TRUE(gf.parts.has_value());
  EXPECT_EQ(gf.parts->size(), 2u);
  EXPECT_FALSE(io::parse_graph_file("1 2\n").parts.has_value());
  EXPECT_THROW(io::parse_graph_file(R"({"version": 1, "edges": [[1]]})"), io::ParseError);
}

TEST(Dot, FigureOneItemGraph) {
  const auto f = fixtures::figure1();
  const std::string dot = io::to_dot(f.instance);
  EXPECT_EQ(dot.rfind("digraph items {", 0), 0u);
  EXPECT_EQ(count(dot, " -> "), 17u);
  EXPECT_EQ(count(dot, ";\n") - 17u, 7u);
  EXPECT_EQ(count(dot, "style=filled"), 0u);
  EXPECT_NE(dot.find("\"c\" -> \"a\" [label=\"3\"]"), std::string::npos);
  EXPECT_EQ(io::to_dot(f.instance), dot);

  const std::string tokens = io::to_dot(f.instance, f.initial);
  EXPECT_EQ(count(tokens, "style=filled"), 4u);
  EXPECT_NE(tokens.find("label=\"b\\n(1)\""), std::string::npos);
}

TEST(Dot, EscapesNamesAndHandlesNoAgents) {
  EXPECT_EQ(io::dot_quote("a\"b\\c"), "\"a\\\"b\\\\c\"");
  const std::string dot = io::to_dot(Instance({}, {"a", "b"}, {}));
  EXPECT_EQ(count(dot, " -> "), 0u);
  EXPECT_NE(dot.find("\"a\";"), std::string::npos);
}

TEST(Commands, Validate) {
  auto r = run([](cli::Streams s) { return cli::cmd_validate(fixtures::data("ex1.json"), s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.out.rfind("ok: 2 agents, 5 items", 0), 0u) << r.out;

  r = run([](cli::Streams s) { return cli::cmd_validate(fixtures::data("figure1.json"), s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
  EXPECT_NE((r.out + r.err).find("(4,3)"), std::string::npos);

  TempDir dir;
  io::write_file(dir.file("bad.json"), "{\"version\": 1,");
  r = run([&](cli::Streams s) { return cli::cmd_validate(dir.file("bad.json"), s); });
  EXPECT_EQ(r.status, cli::kUsage);
  EXPECT_NE(r.err.find("parse error"), std::string::npos);

  r = run([&](cli::Streams s) { return cli::cmd_validate(dir.file("missing.json"), s); });
  EXPECT_EQ(r.status, cli::kUsage);
}

TEST(Commands, Reform) {
  auto r = run([](cli::Streams s) { return cli::cmd_reform({fixtures::data("ex1.json")}, s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_NE(r.out.find("final 1=p 2=q"), std::string::npos) << r.out;

  TempDir dir;
  const std::string gap = write_gap(dir, 4);
  for (const char* policy : {"order:1,2,3", "cycle:1,2,3"}) {
    r = run([&](cli::Streams s) { return cli::cmd_reform({gap, policy}, s); });
    EXPECT_EQ(r.status, cli::kOk);
    EXPECT_EQ(r.out.rfind("steps 7\n", 0), 0u) << policy << "\n" << r.out;
  }
  r = run([&](cli::Streams s) { return cli::cmd_reform({gap, "random"}, s); });
  EXPECT_EQ(r.status, cli::kUsage);
  r = run([&](cli::Streams s) { return cli::cmd_reform({gap, "random", 5}, s); });
  EXPECT_EQ(r.status, cli::kOk);

  // Starting at the reformist matching takes no steps.
  const auto f = fixtures::ex1();
  const std::string at_sigma = dir.file("sigma.json");
  io::save_instance(at_sigma, {f.instance, reformist_matching(f.instance, f.initial)});
  r = run([&](cli::Streams s) { return cli::cmd_reform({at_sigma}, s); });
  EXPECT_EQ(r.out.rfind("steps 0\n", 0), 0u) << r.out;

  // The written sequence verifies.
  const std::string seq = dir.file("seq.json");
  r = run([&](cli::Streams s) { return cli::cmd_reform({gap, "best-first", std::nullopt, seq}, s); });
  r = run([&](cli::Streams s) { return cli::cmd_verify(gap, seq, s); });
  EXPECT_EQ(r.status, cli::kOk) << r.out;
}

TEST(Commands, Shortest) {
  const std::string ex1 = fixtures::data("ex1.json");
  auto r = run([&](cli::Streams s) { return cli::cmd_shortest({ex1}, s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.out, "length 3\n  1. (1:x->r)\n  2. (2:y->q)\n  3. (1:r->p)\n");

  cli::ShortestArgs dec{ex1, "fpt-length"};
  dec.decision = 2;
  r = run([&](cli::Streams s) { return cli::cmd_shortest(dec, s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
  EXPECT_EQ(r.out, "infeasible\n");

  cli::ShortestArgs misuse{ex1, "bfs"};
  misuse.decision = 2;
  EXPECT_EQ(run([&](cli::Streams s) { return cli::cmd_shortest(misuse, s); }).status, cli::kUsage);
  EXPECT_EQ(run([&](cli::Streams s) { return cli::cmd_shortest({ex1, "magic"}, s); }).status, cli::kUsage);

  TempDir dir;
  const std::string gap = write_gap(dir, 3);
  cli::ShortestArgs explain{gap, "auto"};
  explain.explain = true;
  r = run([&](cli::Streams s) { return cli::cmd_shortest(explain, s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_NE(r.out.find("# two-acceptor: selected"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("length 4\n"), std::string::npos) << r.out;

  cli::ShortestArgs tiny{gap, "bfs"};
  tiny.budget = 1;
  r = run([&](cli::Streams s) { return cli::cmd_shortest(tiny, s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
  EXPECT_EQ(r.out, "budget exhausted\n");
}

TEST(Commands, Reachable) {
  const std::string ex1 = fixtures::data("ex1.json");
  auto r = run([&](cli::Streams s) { return cli::cmd_reachable(ex1, "r,q", s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.out, "yes\n");
  r = run([&](cli::Streams s) { return cli::cmd_reachable(ex1, "p,y", s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
  EXPECT_EQ(r.out, "no\n");
  r = run([&](cli::Streams s) { return cli::cmd_reachable(ex1, "1=p,2=q", s); });
  EXPECT_EQ(r.out, "yes\n");
  r = run([&](cli::Streams s) { return cli::cmd_reachable(ex1, "p,p", s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
}

TEST(Commands, Gen) {
  cli::GenArgs gap{"exponential-gap"};
  gap.p = 4;
  auto r = run([&](cli::Streams s) { return cli::cmd_gen(gap, s); });
  EXPECT_EQ(r.status, cli::kOk);
  const auto f = io::parse_instance(r.out);
  EXPECT_EQ(f.instance.num_agents(), 3u);
  EXPECT_EQ(f.instance.num_items(), 11u);

  TempDir dir;
  cli::GenArgs vc{"vertex-cover"};
  vc.complete = 4;
  vc.witness = "1,2,3";
  vc.out = dir.file("vc.json");
  vc.sequence_out = dir.file("vc_seq.json");
  r = run([&](cli::Streams s) { return cli::cmd_gen(vc, s); });
  EXPECT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_EQ(io::load_instance(vc.out).instance.num_agents(), 56u);
  EXPECT_NE(r.err.find("certificate sequence: 65 steps"), std::string::npos) << r.err;
  r = run([&](cli::Streams s) { return cli::cmd_verify(vc.out, vc.sequence_out, s); });
  EXPECT_EQ(r.status, cli::kOk) << r.out;
  EXPECT_NE(r.out.find("valid: 65 steps"), std::string::npos);

  cli::GenArgs sc{"set-cover"};
  sc.sets = fixtures::data("sets_two.txt");
  sc.p = 3;
  sc.witness = "1,2";
  sc.out = dir.file("sc.json");
  sc.sequence_out = dir.file("sc_seq.json");
  r = run([&](cli::Streams s) { return cli::cmd_gen(sc, s); });
  EXPECT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_NE(r.err.find("certificate sequence: 24 steps"), std::string::npos) << r.err;

  cli::GenArgs rnd{"random"};
  rnd.n = 5;
  rnd.m = 9;
  rnd.max_len = 4;
  rnd.seed = 7;
  const auto a = run([&](cli::Streams s) { return cli::cmd_gen(rnd, s); });
  const auto b = run([&](cli::Streams s) { return cli::cmd_gen(rnd, s); });
  EXPECT_EQ(a.status, cli::kOk);
  EXPECT_EQ(a.out, b.out);

  cli::GenArgs no_witness{"vertex-cover"};
  no_witness.complete = 4;
  no_witness.sequence_out = dir.file("x.json");
  EXPECT_EQ(run([&](cli::Streams s) { return cli::cmd_gen(no_witness, s); }).status, cli::kUsage);
  EXPECT_EQ(run([&](cli::Streams s) { return cli::cmd_gen({"bogus"}, s); }).status, cli::kUsage);
  cli::GenArgs irregular{"vertex-cover"};
  irregular.complete = 5;
  EXPECT_EQ(run([&](cli::Streams s) { return cli::cmd_gen(irregular, s); }).status, cli::kDomainFailure);
}

TEST(Commands, ExportDot) {
  const std::string fig = fixtures::data("figure1.json");
  auto r = run([&](cli::Streams s) { return cli::cmd_export_dot(fig, "", "", s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(count(r.out, " -> "), 17u);
  r = run([&](cli::Streams s) { return cli::cmd_export_dot(fig, "initial", "", s); });
  EXPECT_EQ(count(r.out, "style=filled"), 4u);
  r = run([&](cli::Streams s) { return cli::cmd_export_dot(fig, "a,b,c", "", s); });
  EXPECT_EQ(r.status, cli::kUsage);
}

TEST(Commands, VerifyRejectsBadSequences) {
  TempDir dir;
  const std::string ex1 = fixtures::data("ex1.json");
  const std::string bad = dir.file("bad.json");
  io::write_file(bad, R"({"version": 1, "steps": [{"agent": "1", "from": "x", "to": "p"}]})");
  auto r = run([&](cli::Streams s) { return cli::cmd_verify(ex1, bad, s); });
  EXPECT_EQ(r.status, cli::kDomainFailure);
  EXPECT_EQ(r.out, "invalid at step 1 (1:x->p): creates envy (2,1)\n");

  const std::string partial = dir.file("partial.json");
  io::write_file(partial, R"({"version": 1, "steps": [{"agent": "1", "from": "x", "to": "r"}]})");
  r = run([&](cli::Streams s) { return cli::cmd_verify(ex1, partial, s); });
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_NE(r.out.find("stops before the reformist matching"), std::string::npos);

  const std::string other = dir.file("other.json");
  io::write_file(other, R"({"version": 1, "instance": {"hash": "fnv1a64:0000000000000000"}, "steps": []})");
  r = run([&](cli::Streams s) { return cli::cmd_verify(ex1, other, s); });
  EXPECT_EQ(r.status, cli::kUsage);
}
