#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace reform::cli;
  CLI::App app{"Reformist envy-free matchings: validate, reform, shortest sequences, generators"};
  app.require_subcommand(1);

  std::string path;
  auto* validate = app.add_subcommand("validate", "Check an instance file and its initial matching");
  validate->add_option("instance", path, "Instance file")->required();

  ReformArgs ra;
  auto* reform = app.add_subcommand("reform", "Run improvement steps until none is left");
  reform->add_option("instance", ra.path, "Instance file")->required();
  reform->add_option("--policy", ra.policy, "best-first | round-robin | random | order:a,b,.. | cycle:a,b,..");
  reform->add_option("--seed", ra.seed, "Seed for --policy random");
  reform->add_option("--out", ra.out, "Write the sequence file here");

  ShortestArgs sa;
  auto* shortest = app.add_subcommand("shortest", "Shortest reformist sequence");
  shortest->add_option("instance", sa.path, "Instance file")->required();
  shortest->add_option("--algo", sa.algo, "auto | bfs | deg3 | two-acceptor | fpt-length | fpt-k");
  shortest->add_option("--budget", sa.budget, "State budget for bfs, node budget for fpt-length");
  shortest->add_option("--decision", sa.decision, "With fpt-length: only look for sequences of at most this length");
  shortest->add_option("--out", sa.out, "Write the sequence file here");
  shortest->add_flag("--explain", sa.explain, "Print the dispatch decisions");

  std::string target;
  auto* reachable = app.add_subcommand("reachable", "Can the target matching be reached? Exit 0 for yes, 1 for no");
  reachable->add_option("instance", path, "Instance file")->required();
  reachable->add_option("target", target, "Items in agent order (r,q) or agent=item pairs")->required();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("family", ga.family, "exponential-gap | vertex-cover | set-cover | multicolored-clique | random")
      ->required();
  gen->add_option("--p", ga.p, "Gadget size for exponential-gap and set-cover");
  gen->add_option("--graph", ga.graph, "Edge list or JSON graph file");
  gen->add_option("--complete", ga.complete, "Use the complete graph on this many vertices");
  gen->add_option("--sets", ga.sets, "Set family file, one set per line");
  gen->add_option("--parts", ga.parts, "Vertex parts, e.g. 1,2;3;4");
  gen->add_option("--witness", ga.witness, "Cover or clique for the certificate sequence, e.g. 1,2,3");
  gen->add_option("--n", ga.n, "Random: agents");
  gen->add_option("--m", ga.m, "Random: items");
  gen->add_option("--max-len", ga.max_len, "Random: longest preference list");
  gen->add_option("--max-acceptors", ga.max_acceptors, "Random: most agents listing one item");
  gen->add_option("--seed", ga.seed, "Random: seed");
  gen->add_option("--out", ga.out, "Instance file to write (stdout if omitted)");
  gen->add_option("--sequence-out", ga.sequence_out, "Write the certificate sequence here");

  std::string matching;
  std::string dot_out;
  auto* dot = app.add_subcommand("export-dot", "Item graph in DOT");
  dot->add_option("instance", path, "Instance file")->required();
  dot->add_option("--matching", matching, "'initial' or a matching to draw as tokens");
  dot->add_option("--out", dot_out, "Write here instead of stdout");

  std::string sequence;
  auto* verify = app.add_subcommand("verify", "Replay a sequence file");
  verify->add_option("instance", path, "Instance file")->required();
  verify->add_option("sequence", sequence, "Sequence file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  return guarded([&]() -> int {
    if (*validate) return cmd_validate(path);
    if (*reform) return cmd_reform(ra);
    if (*shortest) return cmd_shortest(sa);
    if (*reachable) return cmd_reachable(path, target);
    if (*gen) return cmd_gen(ga);
    if (*dot) return cmd_export_dot(path, matching, dot_out);
    return cmd_verify(path, sequence);
  });
}
