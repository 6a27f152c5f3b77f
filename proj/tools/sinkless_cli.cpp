// sinkless: graph generation, pipeline runs, refutation and the acceptance matrix.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "json.hpp"
#include "sinkless/lower_bound.hpp"
#include "sinkless/slocal_so.hpp"

using namespace sinkless;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Multigraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return read_edge_list(in);
}

// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::optional<TwoColoring> two_coloring(const Multigraph& g) {
  TwoColoring c(g.node_count(), Color::black);
  std::vector<char> seen(g.node_count(), 0);
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::vector<NodeId> queue{s};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (const auto& inc : g.incident(queue[h])) {
        if (!seen[inc.other]) {
          seen[inc.other] = 1;
          c[inc.other] = opposite(c[queue[h]]);
          queue.push_back(inc.other);
        } else if (c[inc.other] == c[queue[h]]) {
          return std::nullopt;
        }
      }
  }
  return c;
}

std::string graph_summary(const Multigraph& g) {
  std::ostringstream os;
  const auto gi = girth(g);
  os << "n " << g.node_count() << " m " << g.edge_count() << " girth " << (gi ? std::to_string(*gi) : "inf");
  if (g.node_count() > 0 && is_regular(g, g.degree(0)))
    os << " regular " << g.degree(0);
  else
    os << " irregular";
  return os.str() + "\n";
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string family, name = "k6_cover", graph, out;
  std::size_t n = 0, d = 3;
  std::uint64_t seed = 1;
};

int cmd_generate(const GenerateArgs& a) {
  Multigraph g;
  if (a.family == "regular") {
    g = random_regular(a.n, a.d, a.seed);
  } else if (a.family == "tree") {
    g = random_tree(a.n, a.seed);
  } else if (a.family == "double_cover") {
    const Multigraph base = a.graph.empty() ? Multigraph(random_regular(a.n, a.d, a.seed)) : load_graph(a.graph);
    g = bipartite_double_cover(base).first;
  } else {
    g = fixture(a.name).graph;
  }
  emit(a.out, to_edge_list(g));
  (a.out.empty() || a.out == "-" ? std::cerr : std::cout) << graph_summary(g);
  return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string graph, ids = "identity", schedule = "identity", format = "json", out, orientation_out;
  std::uint64_t seed = 1;
};

int cmd_run(const RunArgs& a) {
  const auto g = load_graph(a.graph);
  const auto ik = parse_ids(a.ids);
  const auto sk = parse_schedule(a.schedule);
  const auto t0 = std::chrono::steady_clock::now();
  const auto w = make_world(g, make_ids(g, ik, a.seed));
  const auto res = run_pipeline(w, make_schedule(g, sk, a.seed));
  const double wall = seconds_since(t0);
  const auto& r = res.report;

  std::string text;
  if (a.format == "csv") {
    std::ostringstream os;
    os << "graph_ref,id_adversary,schedule_adversary,seed,n,T,declared_locality,measured_max_radius,cluster_count,"
          "max_cluster_radius,violations\n"
       << a.graph << ',' << a.ids << ',' << a.schedule << ',' << a.seed << ',' << r.n << ',' << r.T << ','
       << r.declared_locality << ',' << r.measured_max_radius << ',' << r.cluster_count << ',' << r.max_cluster_radius
       << ',' << r.violations.size() << '\n';
    text = os.str();
    std::cerr << "wall_time " << wall << "\n";
  } else {
    json violations = json::array();
    for (const auto& v : r.violations)
      violations.push_back({{"node", v.node}, {"kind", to_string(v.kind)}, {"degree", v.degree}});
    std::ostringstream digest;
    digest << std::hex << digest_outputs(res.run.outputs());
    json payload = {
        {"trial",
         {{"graph_ref", a.graph},
          {"id_adversary", a.ids},
          {"schedule_adversary", a.schedule},
          {"algorithm_name", "slocal_so"},
          {"seed", a.seed}}},
        {"report",
         {{"n", r.n},
          {"T", r.T},
          {"declared_locality", r.declared_locality},
          {"measured_max_radius", r.measured_max_radius},
          {"cluster_count", r.cluster_count},
          {"max_cluster_radius", r.max_cluster_radius},
          {"violations", violations}}},
        {"outputs_digest", digest.str()}};
    text = json{{"payload", payload}, {"meta", {{"wall_time", wall}}}}.dump(2) + "\n";
  }
  emit(a.out, text);
  if (!a.orientation_out.empty()) {
    std::ostringstream os;
    write_orientation(os, res.orientation);
    emit(a.orientation_out, os.str());
  }
  return r.violations.empty() ? kOk : kFailed;
}

// ---------------------------------------------------------------------------

struct RefuteArgs {
  std::string fixture_name, graph, candidate, table, active = "black", out;
  int T = 0;
  std::uint64_t budget = 0;
};

BipartiteAlgorithm candidate_of(const RefuteArgs& a) {
  const Color active = a.active == "white" ? Color::white : Color::black;
  if (!a.table.empty()) {
    std::ifstream in(a.table);
    if (!in) throw UsageError("cannot open " + a.table);
    return table_algorithm(parse_lookup_table(in));
  }
  for (const auto& [prefix, T] : {std::pair{std::string("random0#"), 0}, std::pair{std::string("random1#"), 1}})
    if (a.candidate.rfind(prefix, 0) == 0) {
      const auto seed = std::stoull(a.candidate.substr(prefix.size()));
      return T == 0 ? random_zero_round_algorithm(seed, active) : random_radius_one_algorithm(seed, false, active);
    }
  try {
    return strawman(a.candidate, a.T, active);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

int cmd_refute(const RefuteArgs& a) {
  SupportInstance si;
  std::string ref;
  if (!a.graph.empty()) {
    const auto g = load_graph(a.graph);
    auto c = two_coloring(g);
    if (!c) throw UsageError("support graph is not bipartite");
    si = make_support_instance(a.graph, g, std::move(*c));
    ref = a.graph;
  } else {
    si = support_fixture(a.fixture_name);
    ref = "fixture:" + a.fixture_name;
  }
  const auto alg = candidate_of(a);
  if (alg.locality > 0 && si.girth != -1 && 2 * alg.locality >= si.girth)
    throw UsageError("precondition: T=" + std::to_string(alg.locality) + " needs girth above " +
                     std::to_string(2 * alg.locality) + ", " + ref + " has girth " + std::to_string(si.girth));
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<EnumerationBudget> budget;
  if (a.budget) budget.emplace(a.budget);
  Refutation r;
  try {
    r = refute(si, alg);
  } catch (const EliminationPreconditionError& e) {
    throw UsageError(std::string("precondition: ") + e.what());
  }
  if (!verify_counterexample(si, alg, r.cex)) {
    std::cerr << "error: certificate for " << alg.name << " does not verify\n";
    return kFailed;
  }
  json cert = {{"support_graph_ref", ref},
               {"input_edge_ids", r.cex.input.indices()},
               {"violating_node", r.cex.node},
               {"kind", to_string(r.cex.kind)}};
  emit(a.out, cert.dump(2) + "\n");
  json chain = json::array();
  for (std::size_t k = 0; k < r.chain.size(); ++k)
    chain.push_back({{"algorithm", r.algorithms[r.algorithms.size() - 1 - k]},
                     {"violating_node", r.chain[k].node},
                     {"kind", to_string(r.chain[k].kind)}});
  json summary = {{"payload",
                   {{"algorithm", alg.name},
                    {"T", alg.locality},
                    {"zero_round_branch", std::string(1, r.zero_round_branch)},
                    {"zero_round_queries", r.zero_round_queries},
                    {"chain", chain}}},
                  {"meta", {{"wall_time", seconds_since(t0)}}}};
  (a.out.empty() || a.out == "-" ? std::cerr : std::cout) << summary.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct AcceptanceArgs {
  std::string only = "all", mutate = "none", format = "json", out;
  std::uint64_t seed = 1;
  bool heavy = false, quick = false;
};

int cmd_acceptance(const AcceptanceArgs& a) {
  acceptance::Config cfg;
  cfg.seed = a.seed;
  cfg.heavy = a.heavy;
  cfg.quick = a.quick;
  cfg.threads = acceptance::threads_from_env();
  if (a.only == "none") cfg.criteria.clear();
  if (a.only != "all" && a.only != "none") {
    cfg.criteria.clear();
    std::stringstream ss(a.only);
    for (std::string tok; std::getline(ss, tok, ',');) {
      if (tok.empty()) continue;
      try {
        const int id = std::stoi(tok);
        if (id < 1 || id > 10) throw std::out_of_range(tok);
        cfg.criteria.push_back(id);
      } catch (const std::exception&) {
        throw UsageError("bad criterion: " + tok);
      }
    }
  }
  if (a.mutate == "first_endpoint") cfg.greedy_rule = GreedyRule::first_endpoint;
  if (a.mutate == "more_processed") cfg.greedy_rule = GreedyRule::more_processed;

  const auto s = acceptance::run_acceptance(cfg, std::cerr);
  std::string text;
  if (a.format == "csv") {
    std::ostringstream os;
    os << "id,title,pass,trials,failures\n";
    for (const auto& c : s.criteria)
      os << c.id << ',' << c.title << ',' << (c.pass ? "pass" : "fail") << ',' << c.trials << ',' << c.failures << '\n';
    text = os.str();
  } else {
    text = acceptance::summary_json(cfg, s).dump(2) + "\n";
  }
  emit(a.out, text);
  return s.pass() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sinkless orientation: SLOCAL pipeline, lower-bound refuter and acceptance matrix"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a graph in edge-list format");
  g->add_option("--family", gen.family, "graph family")
      ->required()
      ->check(CLI::IsMember({"regular", "tree", "double_cover", "fixture"}));
  g->add_option("--n", gen.n, "node count");
  g->add_option("--d", gen.d, "degree for regular graphs");
  g->add_option("--name", gen.name, "fixture name")->check(CLI::IsMember(fixture_names()));
  g->add_option("--graph", gen.graph, "base graph for double_cover")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "seed");
  g->add_option("--out", gen.out, "output file (default stdout)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "run the SLOCAL pipeline and report");
  r->add_option("--graph", run.graph, "edge-list file")->required();
  r->add_option("--ids", run.ids, "identifier adversary")->check(CLI::IsMember({"identity", "random", "degree"}));
  r->add_option("--schedule", run.schedule, "schedule adversary")
      ->check(CLI::IsMember({"identity", "reverse", "random", "bfs", "degree", "interleave"}));
  r->add_option("--seed", run.seed, "seed");
  r->add_option("--format", run.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  r->add_option("--out", run.out, "report file (default stdout)");
  r->add_option("--orientation-out", run.orientation_out, "orientation file");

  RefuteArgs ref;
  auto* f = app.add_subcommand("refute", "find a verified counterexample for a candidate algorithm");
  auto* fx = f->add_option("--fixture", ref.fixture_name, "support fixture")->check(CLI::IsMember(fixture_names()));
  auto* fg = f->add_option("--graph", ref.graph, "support graph edge-list file");
  fx->excludes(fg);
  auto* fc = f->add_option("--candidate", ref.candidate, "builtin algorithm: constant_O, constant_I, parity, "
                                                          "lowest_edge, id_compare, random0#SEED, random1#SEED");
  auto* ft = f->add_option("--table", ref.table, "lookup-table file");
  fc->excludes(ft);
  f->add_option("--T", ref.T, "locality of a builtin candidate")->check(CLI::NonNegativeNumber);
  f->add_option("--active", ref.active, "active color")->check(CLI::IsMember({"black", "white"}));
  f->add_option("--budget", ref.budget, "enumeration step cap (0: none)");
  f->add_option("--out", ref.out, "certificate file (default stdout)");

  AcceptanceArgs acc;
  auto* a = app.add_subcommand("acceptance", "run the acceptance matrix");
  a->add_option("--only", acc.only, "comma-separated criteria, 'all', or 'none'");
  a->add_option("--seed", acc.seed, "seed");
  a->add_flag("--heavy", acc.heavy, "include the girth-6 refutation at T=2");
  a->add_flag("--quick", acc.quick, "shrunken matrix");
  a->add_option("--mutate-greedy", acc.mutate, "replace rule 2 of the greedy algorithm")
      ->check(CLI::IsMember({"none", "first_endpoint", "more_processed"}));
  a->add_option("--format", acc.format, "summary format")->check(CLI::IsMember({"json", "csv"}));
  a->add_option("--out", acc.out, "summary file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) {
      if (gen.family != "fixture" && gen.n == 0 && gen.graph.empty()) throw UsageError("--n is required");
      return cmd_generate(gen);
    }
    if (*r) return cmd_run(run);
    if (*f) {
      if (ref.fixture_name.empty() && ref.graph.empty()) throw UsageError("one of --fixture or --graph is required");
      if (ref.candidate.empty() && ref.table.empty()) throw UsageError("one of --candidate or --table is required");
      return cmd_refute(ref);
    }
    return cmd_acceptance(acc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
