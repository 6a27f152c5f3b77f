#pragma once

// The acceptance matrix shared by the CLI and the ctest-registered runner.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sinkless/lower_bound.hpp"
#include "sinkless/slocal_so.hpp"

namespace sinkless::acceptance {

using json = nlohmann::ordered_json;

inline constexpr const char* kThreadsEnv = "SINKLESS_THREADS";

struct Config {
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 1;
  bool heavy = false;
  bool quick = false;  // shrunken matrix for smoke runs
  GreedyRule greedy_rule = GreedyRule::fewer_processed;
  unsigned threads = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string detail;
  double seconds = 0;
};

struct Summary {
  std::vector<CriterionResult> criteria;
  std::vector<std::string> warnings;
  bool pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
  }
};

inline unsigned threads_from_env() {
  if (const char* s = std::getenv(kThreadsEnv)) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline std::uint64_t trial_seed(std::uint64_t seed, int criterion, std::uint64_t index) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(criterion) * 0x100000001b3ull + index;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// f(i) for i in [0, count); f must not throw. Slots are written by index, so
// results do not depend on completion order.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next++) < count;) f(i);
  };
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (k <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(work);
}

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Oracles written independently of the library's validators.

inline std::size_t count_sinks(const Multigraph& g, const Orientation& o, std::size_t min_degree) {
  std::size_t sinks = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) < min_degree) continue;
    bool out = false;
    for (const auto& inc : g.incident(v)) out |= o.head[inc.edge] != v && o.head[inc.edge] != kNoHead;
    sinks += !out;
  }
  return sinks;
}

inline int threshold_oracle(std::uint64_t n) {
  int th = 0;
  for (std::uint64_t x = n; x > 0; x >>= 1) ++th;  // floor(log2 n) + 1
  return th;
}

inline int t_oracle(std::uint64_t n) {
  const int th = threshold_oracle(n);
  int T = 0;
  while ((1 << T) < th) ++T;  // ceil(log2 th)
  return T;
}

inline std::string clustering_problem(const Multigraph& g, const Clustering& c) {
  const std::size_t n = g.node_count();
  const int T = c.T, R = 2 * T + 1;
  std::vector<NodeId> centers;
  for (NodeId v = 0; v < n; ++v)
    if (c.independent[v]) centers.push_back(v);
  for (NodeId x : centers) {
    const auto d = bfs_distances(g, x, R);
    for (NodeId v = 0; v < n; ++v) {
      if (d[v] == kUnreached) continue;
      if (v != x && c.independent[v]) return "centers " + std::to_string(x) + " and " + std::to_string(v) + " too close";
      if (d[v] <= T && c.owner[v] != x) return "node " + std::to_string(v) + " near " + std::to_string(x) + " owned elsewhere";
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    const NodeId o = c.owner[v];
    if (o >= n || !c.independent[o]) return "owner of " + std::to_string(v) + " is not a center";
    const auto d = bfs_distances(g, o, R);
    if (d[v] == kUnreached) return "node " + std::to_string(v) + " far from its owner";
  }
  const auto cg = build_cluster_graph(g, c.owner);
  std::vector<int> hit(g.edge_count(), 0);
  for (EdgeId ce = 0; ce < cg.graph.edge_count(); ++ce) {
    const EdgeId e = cg.provenance[ce];
    ++hit[e];
    const auto [a, b] = cg.graph.endpoints(ce);
    const auto [u, v] = g.endpoints(e);
    if (std::minmax(cg.center[a], cg.center[b]) != std::minmax(c.owner[u], c.owner[v]))
      return "cluster edge " + std::to_string(ce) + " maps to the wrong clusters";
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [u, v] = g.endpoints(e);
    if (hit[e] != (c.owner[u] != c.owner[v] ? 1 : 0)) return "provenance is not a bijection at edge " + std::to_string(e);
  }
  return {};
}

// Two paths with a rung every `gap` steps; long diameter for perturbation.
inline Multigraph ladder(std::size_t len, std::size_t gap) {
  EdgeList el;
  for (std::size_t i = 0; i + 1 < len; ++i) {
    el.emplace_back(i, i + 1);
    el.emplace_back(len + i, len + i + 1);
  }
  for (std::size_t i = 0; i < len; i += gap) el.emplace_back(i, len + i);
  return Multigraph(2 * len, el);
}

// Independent replay of a bipartite certificate straight from decide.
inline bool replays_as_violation(const SupportInstance& si, const BipartiteAlgorithm& alg, const Counterexample& c) {
  const auto oracle = oracle_of(c.input);
  std::size_t deg = 0;
  bool all_o = true, all_i = true;
  for (const auto& inc : si.graph.incident(c.node)) {
    if (!c.input.test(inc.edge)) continue;
    ++deg;
    const NodeId a = si.coloring[c.node] == alg.active ? c.node : inc.other;
    const Label l = run_decide(si, alg, a, oracle)[edge_index(si, a, inc.edge)];
    all_o &= l == Label::O;
    all_i &= l == Label::I;
  }
  if (deg < 3) return false;
  if (c.kind == ViolationKind::active_sink) return si.coloring[c.node] == alg.active && all_i;
  if (c.kind == ViolationKind::passive_sink) return si.coloring[c.node] != alg.active && all_o;
  return false;
}

struct PipelineTrial {
  std::string key;
  std::uint64_t n = 0;
  int T = 0;
  int declared = 0;
  int measured = 0;
  std::size_t sinks = 0;
  std::size_t violations = 0;
  std::size_t lemma_errors = 0;
  std::string error;
};

// Step failures arrive wrapped with the node being processed.
inline void record_failure(const std::exception& e, PipelineTrial& t) {
  const auto* wrapped = dynamic_cast<const ExecutionError*>(&e);
  if (dynamic_cast<const LowDegreeLemmaViolation*>(&e) || (wrapped && wrapped->caused_by<LowDegreeLemmaViolation>()))
    ++t.lemma_errors;
  t.error = e.what();
}

inline void run_pipeline_trial(const Multigraph& g, IdKind ik, ScheduleKind sk, std::uint64_t seed, PipelineTrial& t) {
  t.n = g.node_count();
  try {
    const auto w = make_world(g, make_ids(g, ik, seed));
    const auto res = run_pipeline(w, make_schedule(g, sk, seed ^ 0x5eedull));
    t.T = res.report.T;
    t.declared = res.report.declared_locality;
    t.measured = res.report.measured_max_radius;
    t.violations = res.report.violations.size();
    t.sinks = count_sinks(g, res.orientation, 3);
    for (EdgeId e = 0; e < g.edge_count(); ++e)
      if (res.orientation.head[e] == kNoHead && t.error.empty()) t.error = "edge " + std::to_string(e) + " undecided";
  } catch (const std::exception& e) {
    record_failure(e, t);
  }
}

struct Matrix {
  const Config& cfg;
  std::ostream& log;
  Summary summary;
  std::vector<PipelineTrial> validity;  // trials of the end-to-end matrix
  std::vector<PipelineTrial> clustering;
  double validity_seconds = 0, clustering_seconds = 0;
  bool validity_done = false, clustering_done = false;

  void report(CriterionResult r) {
    log << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.title << ": " << r.detail << " (" << std::fixed
        << std::setprecision(1) << r.seconds << " s)" << std::endl;
    summary.criteria.push_back(std::move(r));
  }

  void run_validity() {
    if (validity_done) return;
    validity_done = true;
    const auto t0 = Clock::now();
    struct G {
      std::string name;
      std::function<Multigraph()> make;
    };
    std::vector<G> graphs;
    const std::vector<std::size_t> sizes = cfg.quick ? std::vector<std::size_t>{1000} : std::vector<std::size_t>{1000, 10000, 100000};
    for (std::size_t d : {3u, 5u, 10u})
      for (std::size_t n : sizes)
        graphs.push_back({"regular d=" + std::to_string(d) + " n=" + std::to_string(n),
                          [=, this] { return random_regular(n, d, trial_seed(cfg.seed, 1, n * 16 + d)); }});
    const std::size_t tree_n = cfg.quick ? 1000 : 10000;
    graphs.push_back({"tree n=" + std::to_string(tree_n), [=, this] { return random_tree(tree_n, trial_seed(cfg.seed, 1, 7)); }});
    graphs.push_back({"path n=7", [] { return path_graph(7); }});

    std::vector<Multigraph> built(graphs.size());
    parallel_for(graphs.size(), cfg.threads, [&](std::size_t i) { built[i] = graphs[i].make(); });

    const auto& kinds = schedule_kinds();
    const std::vector<IdKind> id_kinds{IdKind::identity, IdKind::random, IdKind::degree};
    struct Combo {
      IdKind ik;
      ScheduleKind sk;
    };
    std::vector<Combo> combos;
    for (auto ik : id_kinds)
      for (const auto& [name, sk] : kinds) combos.push_back({ik, sk});
    while (combos.size() < 20) combos.push_back({IdKind::random, ScheduleKind::random});

    validity.resize(graphs.size() * combos.size());
    for (std::size_t gi = 0; gi < graphs.size(); ++gi)
      for (std::size_t c = 0; c < combos.size(); ++c)
        validity[gi * combos.size() + c].key = graphs[gi].name + " ids=" + to_string(combos[c].ik) +
                                                " schedule=" + to_string(combos[c].sk) + " #" + std::to_string(c);
    // Largest graphs first so a parallel run does not end on one straggler.
    std::vector<std::size_t> order(validity.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return built[a / combos.size()].edge_count() > built[b / combos.size()].edge_count();
    });
    parallel_for(order.size(), cfg.threads, [&](std::size_t k) {
      const std::size_t i = order[k];
      const auto& combo = combos[i % combos.size()];
      run_pipeline_trial(built[i / combos.size()], combo.ik, combo.sk, trial_seed(cfg.seed, 1, i), validity[i]);
    });
    validity_seconds = seconds_since(t0);
  }

  void run_clustering_trials() {
    if (clustering_done) return;
    clustering_done = true;
    const auto t0 = Clock::now();
    const std::size_t count = cfg.quick ? 40 : 200;
    clustering.resize(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      auto& t = clustering[i];
      const auto s = trial_seed(cfg.seed, 4, i);
      std::mt19937_64 rng(s);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 3000)(rng);
      Multigraph g;
      switch (i % 4) {
        case 0: {
          const std::size_t d = 3 + i % 3;
          g = random_regular(n + (n * d) % 2, d, s);
          break;
        }
        case 1: g = random_simple_graph(n, n + n / 2 + rng() % n, s); break;
        case 2: g = random_tree(n, s); break;
        default: g = random_multigraph(n, 2 * n, s); break;
      }
      const auto ik = static_cast<IdKind>(i % 3);
      const auto sk = schedule_kinds()[i % schedule_kinds().size()].second;
      t.key = "graph #" + std::to_string(i) + " n=" + std::to_string(g.node_count());
      t.n = g.node_count();
      try {
        const auto w = make_world(g, make_ids(g, ik, s));
        const auto sched = make_schedule(g, sk, s);
        const auto c = run_clustering(w, sched);
        if (c.T != t_oracle(std::max<std::size_t>(g.node_count(), 2))) t.error = "clustering uses the wrong T";
        if (t.error.empty()) t.error = clustering_problem(g, c);
        if (t.error.empty()) {
          const auto res = run_pipeline(w, sched);
          t.sinks = count_sinks(g, res.orientation, 3);
          t.violations = res.report.violations.size();
          // The composed run builds clusters in demand order, so its MIS may
          // differ from the standalone one; it must satisfy the same invariants.
          if (const auto p = clustering_problem(g, res.clustering); !p.empty()) t.error = "pipeline clustering: " + p;
        }
      } catch (const std::exception& e) {
        record_failure(e, t);
      }
    });
    clustering_seconds = seconds_since(t0);
  }

  static std::string first_failure(const std::vector<PipelineTrial>& ts, const std::function<bool(const PipelineTrial&)>& bad) {
    for (const auto& t : ts)
      if (bad(t)) return "; first failure: " + t.key + (t.error.empty() ? "" : " (" + t.error + ")");
    return {};
  }

  void criterion_validity() {
    run_validity();
    const auto bad = [](const PipelineTrial& t) { return t.sinks || t.violations || !t.error.empty(); };
    const auto failures = std::count_if(validity.begin(), validity.end(), bad);
    std::size_t sinks = 0;
    for (const auto& t : validity) sinks += t.sinks;
    report({1, "end-to-end validity", failures == 0, validity.size(), static_cast<std::size_t>(failures),
            std::to_string(validity.size()) + " trials, " + std::to_string(sinks) + " sinks" + first_failure(validity, bad),
            validity_seconds});
  }

  void criterion_locality() {
    const auto t0 = Clock::now();
    run_validity();
    const auto bad = [](const PipelineTrial& t) {
      const int T = t_oracle(std::max<std::uint64_t>(t.n, 2));
      return !t.error.empty() || t.T != T || t.declared != 38 * T + 25 || t.measured > t.declared;
    };
    const auto failures = std::count_if(validity.begin(), validity.end(), bad);
    int worst = 0, at_1e5 = -1;
    for (const auto& t : validity) {
      worst = std::max(worst, t.measured);
      if (t.n == 100000) at_1e5 = t.T;
    }
    std::string detail = std::to_string(validity.size()) + " trials, max measured radius " + std::to_string(worst);
    bool pinned = true;
    if (at_1e5 >= 0) {
      detail += ", T=" + std::to_string(at_1e5) + " at n=1e5";
      pinned = at_1e5 == 5;
    }
    report({2, "locality budget", failures == 0 && pinned, validity.size(), static_cast<std::size_t>(failures),
            detail + first_failure(validity, bad), seconds_since(t0)});
  }

  void criterion_greedy() {
    const auto t0 = Clock::now();
    const std::size_t graphs = cfg.quick ? 50 : 500, orders = cfg.quick ? 20 : 100;
    struct R {
      std::size_t failures = 0;
      std::string first;
    };
    std::vector<R> rs(graphs);
    parallel_for(graphs, cfg.threads, [&](std::size_t i) {
      const auto s = trial_seed(cfg.seed, 3, i);
      std::mt19937_64 rng(s);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
      const std::size_t m = std::uniform_int_distribution<std::size_t>(0, 800)(rng);
      // The potential argument needs the threshold taken from at least n nodes.
      const std::uint64_t n_src = n << std::uniform_int_distribution<int>(0, 6)(rng);
      const auto g = random_multigraph(n, m, s);
      const auto ids = make_ids(g, IdKind::random, s);
      std::vector<EdgeId> order(g.edge_count());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t k = 0; k < orders; ++k) {
        std::shuffle(order.begin(), order.end(), rng);
        const auto inv = greedy_invariant_check(g, n_src, order, ids, cfg.greedy_rule);
        const auto o = greedy_high_degree_so(g, n_src, order, ids, cfg.greedy_rule);
        const auto th = static_cast<std::size_t>(threshold_oracle(n_src));
        const bool ok = inv.pass && validate_high_degree(g, o, n_src).empty() && count_sinks(g, o, th) == 0;
        if (!ok && rs[i].failures++ == 0)
          rs[i].first = "graph " + std::to_string(i) + " order " + std::to_string(k) +
                        (inv.pass ? " leaves a high-degree sink" : " breaks the potential at step " + std::to_string(inv.failing_step));
      }
    });
    std::size_t failures = 0;
    std::string first;
    for (const auto& r : rs) {
      failures += r.failures;
      if (first.empty() && !r.first.empty()) first = "; first failure: " + r.first;
    }
    report({3, "greedy invariant", failures == 0, graphs * orders, failures,
            std::to_string(graphs) + " multigraphs x " + std::to_string(orders) + " orders, " + std::to_string(failures) +
                " failing runs" + first,
            seconds_since(t0)});
  }

  void criterion_clustering() {
    run_clustering_trials();
    const auto bad = [](const PipelineTrial& t) { return !t.error.empty() || t.sinks || t.violations; };
    const auto failures = std::count_if(clustering.begin(), clustering.end(), bad);
    report({4, "clustering invariants", failures == 0, clustering.size(), static_cast<std::size_t>(failures),
            std::to_string(clustering.size()) + " graphs" + first_failure(clustering, bad), clustering_seconds});
  }

  void criterion_low_degree() {
    const auto t0 = Clock::now();
    run_validity();
    run_clustering_trials();
    std::size_t lemma = 0, errors = 0;
    for (const auto* ts : {&validity, &clustering})
      for (const auto& t : *ts) {
        lemma += t.lemma_errors;
        errors += !t.error.empty();
      }
    report({5, "low-degree cluster lemma", lemma == 0 && errors == 0, validity.size() + clustering.size(), lemma,
            std::to_string(validity.size() + clustering.size()) + " pipeline trials, " + std::to_string(lemma) +
                " impossibility errors, " + std::to_string(errors) + " other errors",
            seconds_since(t0)});
  }

  void criterion_composition() {
    const auto t0 = Clock::now();
    const std::size_t trials = cfg.quick ? 10 : 50;
    const int perturbations = cfg.quick ? 20 : 200;
    std::vector<std::string> errs(trials);
    std::vector<std::size_t> outside(trials, 0);
    const auto alg = sinkless_orientation_slocal();
    parallel_for(trials, cfg.threads, [&](std::size_t i) {
      const auto s = trial_seed(cfg.seed, 6, i);
      std::mt19937_64 rng(s);
      Multigraph g;
      if (i % 2 == 0)
        g = ladder(std::uniform_int_distribution<std::size_t>(200, 320)(rng), 1 + i % 4);
      else if (i % 4 == 1)
        g = random_regular(100 + 2 * (rng() % 50), 3, s);
      else
        g = random_simple_graph(120, 200, s);
      try {
        const auto w = make_world(g, make_ids(g, static_cast<IdKind>(i % 3), s));
        const auto sched = make_schedule(g, schedule_kinds()[i % schedule_kinds().size()].second, s);
        const auto res = run_pipeline(w, sched);
        if (digest_outputs(res.run.outputs()) != digest_outputs(staged_pipeline_reference(w, sched, res.run))) {
          errs[i] = "composed and staged outputs differ";
          return;
        }
        const int r = alg.locality(g.node_count());
        const NodeId v = static_cast<NodeId>(rng() % g.node_count());
        const auto d = bfs_distances(g, v, r);
        outside[i] = std::count(d.begin(), d.end(), kUnreached);
        const auto p = perturbation_check(w, alg, sched, v, r, perturbations, s);
        if (!p.pass || p.trials != perturbations) errs[i] = "perturbation changed the output: " + p.witness;
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    });
    std::size_t failures = 0, with_outside = 0;
    std::string first;
    for (std::size_t i = 0; i < trials; ++i) {
      with_outside += outside[i] > 0;
      if (!errs[i].empty() && failures++ == 0) first = "; first failure: trial " + std::to_string(i) + " (" + errs[i] + ")";
    }
    report({6, "composition", failures == 0, trials, failures,
            std::to_string(trials) + " trials x " + std::to_string(perturbations) + " perturbations, " +
                std::to_string(with_outside) + " with nodes beyond the declared radius" + first,
            seconds_since(t0)});
  }

  void criterion_zero_round() {
    const auto t0 = Clock::now();
    const auto si = support_fixture("k6_cover");
    std::vector<BipartiteAlgorithm> algs = strawmen(0);
    const std::size_t randoms = cfg.quick ? 100 : 1000;
    for (std::size_t k = 0; k < randoms; ++k)
      algs.push_back(random_zero_round_algorithm(trial_seed(cfg.seed, 7, k), k % 2 ? Color::white : Color::black));
    constexpr std::size_t kQueryBudget = 6 * 32;
    std::vector<std::string> errs(algs.size());
    std::vector<std::size_t> queries(algs.size(), 0);
    parallel_for(algs.size(), cfg.threads, [&](std::size_t i) {
      try {
        const auto z = refute_zero_round(si, algs[i], kQueryBudget);
        queries[i] = z.queries;
        const auto rep = replay(si, algs[i], z.cex.input);
        const bool listed = std::any_of(rep.begin(), rep.end(),
                                        [&](const Violation& v) { return v.node == z.cex.node && v.kind == z.cex.kind; });
        if (!listed || !replays_as_violation(si, algs[i], z.cex)) errs[i] = "certificate does not replay";
        if (z.queries > kQueryBudget) errs[i] = "query budget exceeded";
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    });
    std::size_t failures = 0;
    std::string first;
    for (std::size_t i = 0; i < algs.size(); ++i)
      if (!errs[i].empty() && failures++ == 0) first = "; first failure: " + algs[i].name + " (" + errs[i] + ")";
    report({7, "zero-round refutation", failures == 0, algs.size(), failures,
            std::to_string(algs.size()) + " algorithms, max " +
                std::to_string(*std::max_element(queries.begin(), queries.end())) + " queries" + first,
            seconds_since(t0)});
  }

  void criterion_refutation() {
    const auto t0 = Clock::now();
    const auto si = support_fixture("k6_cover");
    const auto algs = strawmen(1);
    std::vector<std::string> errs(algs.size());
    parallel_for(algs.size(), cfg.threads, [&](std::size_t i) {
      try {
        const auto r = refute(si, algs[i]);
        if (!replays_as_violation(si, algs[i], r.cex)) {
          errs[i] = "certificate does not replay";
          return;
        }
        const auto memo = memoized(algs[i]);
        bool covered = false;
        for_each_violation(si, memo, [&](NodeId x, ViolationKind k, const Assignment& a) {
          bool match = x == r.cex.node && k == r.cex.kind;
          for (const auto& [e, b] : a) match &= r.cex.input.test(e) == b;
          covered |= match;
          return !covered;
        });
        if (!covered) errs[i] = "exhaustive sweep does not reach the certificate";
        const auto ex = exhaustive_check(si, algs[i]);
        if (!ex || !replays_as_violation(si, algs[i], *ex)) errs[i] = "exhaustive check finds no violation";
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    });
    std::size_t failures = 0;
    std::string first;
    for (std::size_t i = 0; i < algs.size(); ++i)
      if (!errs[i].empty() && failures++ == 0) first = "; first failure: " + algs[i].name + " (" + errs[i] + ")";
    std::string detail = std::to_string(algs.size()) + " strawmen at T=1 on k6_cover, " +
                         std::to_string(algs.size() - failures) + " refuted and confirmed";
    bool pass = failures == 0;
    std::size_t trials = algs.size();
    if (cfg.heavy) {
      constexpr std::uint64_t kHeavyBudget = 2'000'000;
      const auto pg = support_fixture("pg24");
      const auto heavy = strawmen(2);
      std::vector<char> ok(heavy.size(), 0);
      parallel_for(heavy.size(), cfg.threads, [&](std::size_t i) {
        try {
          EnumerationBudget budget(kHeavyBudget);
          const auto r = refute(pg, heavy[i]);
          ok[i] = replays_as_violation(pg, heavy[i], r.cex);
        } catch (const std::exception&) {
        }
      });
      std::string names;
      for (std::size_t i = 0; i < heavy.size(); ++i)
        if (ok[i]) names += (names.empty() ? "" : ",") + heavy[i].name;
      const auto refuted = std::count(ok.begin(), ok.end(), 1);
      detail += "; heavy: " + std::to_string(refuted) + "/" + std::to_string(heavy.size()) + " at T=2 on pg24 (" + names + ")";
      pass &= refuted >= 2;
      trials += heavy.size();
    }
    report({8, "full refutation", pass, trials, failures, detail + first, seconds_since(t0)});
  }

  void criterion_elimination() {
    const auto t0 = Clock::now();
    const auto si = support_fixture("k6_cover");
    const std::size_t count = cfg.quick ? 10 : 100;
    std::vector<std::string> errs(count);
    std::vector<std::size_t> lifted(count, 0);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      try {
        const auto alg = memoized(random_radius_one_algorithm(trial_seed(cfg.seed, 9, i)));
        const auto elim = eliminate_round(si, alg);
        for_each_violation(si, elim, [&](NodeId x, ViolationKind k, const Assignment& a) {
          const Counterexample c{apply_assignment(EdgeSet(si.m()), a), x, k};
          try {
            const auto up = lift_counterexample(si, alg, elim, c);
            if (!replays_as_violation(si, alg, up)) throw LowerBoundError("lifted certificate does not replay");
            ++lifted[i];
          } catch (const std::exception& e) {
            errs[i] = "node " + std::to_string(x) + ": " + e.what();
            return false;
          }
          return true;
        });
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    });
    std::size_t failures = 0, total = 0;
    std::string first;
    for (std::size_t i = 0; i < count; ++i) {
      total += lifted[i];
      if (!errs[i].empty() && failures++ == 0) first = "; first failure: algorithm " + std::to_string(i) + " (" + errs[i] + ")";
    }
    report({9, "round-elimination soundness", failures == 0, count, failures,
            std::to_string(count) + " radius-1 algorithms, " + std::to_string(total) + " violations lifted" + first,
            seconds_since(t0)});
  }

  void criterion_global() {
    const auto t0 = Clock::now();
    const std::size_t count = cfg.quick ? 100 : 1000;
    std::vector<std::string> errs(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      const auto s = trial_seed(cfg.seed, 10, i);
      std::mt19937_64 rng(s);
      // Log-uniform sizes up to 10^4.
      const auto n = static_cast<std::size_t>(std::pow(10.0, std::uniform_real_distribution<double>(0.5, 4.0)(rng)));
      Multigraph g;
      switch (i % 6) {
        case 0: g = random_regular(n + n % 2, 3, s); break;
        case 1: g = random_regular(n + 6, 5 + (n % 2), s); break;
        case 2: g = random_tree(n, s); break;
        case 3: g = random_simple_graph(n, std::min(n * (n - 1) / 2, n + rng() % (2 * n + 1)), s); break;
        case 4: g = random_multigraph(std::max<std::size_t>(n, 2), 2 * n, s); break;
        default: g = i % 12 == 5 ? cycle_graph(std::max<std::size_t>(n, 3)) : complete_graph(2 + n % 40); break;
      }
      try {
        const auto ids = make_ids(g, static_cast<IdKind>(i % 3), s);
        const auto o = global_orientation(g, ids);
        check_orientation(g, o, true);
        if (!validate_sinkless(g, o).empty() || count_sinks(g, o, 3) != 0) errs[i] = "sink in the reference orientation";
      } catch (const std::exception& e) {
        errs[i] = e.what();
      }
    });
    std::size_t failures = 0;
    std::string first;
    for (std::size_t i = 0; i < count; ++i)
      if (!errs[i].empty() && failures++ == 0) first = "; first failure: instance " + std::to_string(i) + " (" + errs[i] + ")";
    report({10, "global oracle", failures == 0, count, failures, std::to_string(count) + " instances" + first,
            seconds_since(t0)});
  }
};

}  // namespace detail

inline Summary run_acceptance(const Config& cfg, std::ostream& log) {
  detail::Matrix m{cfg, log, {}, {}, {}};
  if (cfg.criteria.empty()) m.summary.warnings.push_back("empty matrix: nothing to check");
  std::set<int> wanted(cfg.criteria.begin(), cfg.criteria.end());
  for (int id : wanted) {
    switch (id) {
      case 1: m.criterion_validity(); break;
      case 2: m.criterion_locality(); break;
      case 3: m.criterion_greedy(); break;
      case 4: m.criterion_clustering(); break;
      case 5: m.criterion_low_degree(); break;
      case 6: m.criterion_composition(); break;
      case 7: m.criterion_zero_round(); break;
      case 8: m.criterion_refutation(); break;
      case 9: m.criterion_elimination(); break;
      case 10: m.criterion_global(); break;
      default: throw std::invalid_argument("unknown criterion " + std::to_string(id));
    }
  }
  for (const auto& w : m.summary.warnings) log << "warning: " << w << std::endl;
  return std::move(m.summary);
}

/// Deterministic payload plus timings under "meta".
inline json summary_json(const Config& cfg, const Summary& s) {
  json crit = json::array(), timing = json::object();
  for (const auto& c : s.criteria) {
    crit.push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"trials", c.trials}, {"failures", c.failures},
                    {"detail", c.detail}});
    timing[std::to_string(c.id)] = c.seconds;
  }
  json payload = {{"seed", cfg.seed}, {"heavy", cfg.heavy}, {"quick", cfg.quick},
                  {"criteria", crit},  {"warnings", s.warnings}, {"pass", s.pass()}};
  return {{"payload", payload}, {"meta", {{"seconds", timing}, {"threads", cfg.threads}}}};
}

}  // namespace sinkless::acceptance
