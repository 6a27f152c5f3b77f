#include <gtest/gtest.h>

#include <set>

#include "sinkless/models.hpp"

using namespace sinkless;

namespace {

std::vector<NodeId> iota_order(std::size_t n) {
  std::vector<NodeId> s(n);
  for (NodeId v = 0; v < n; ++v) s[v] = v;
  return s;
}

Record out_record(Blob b, std::uint64_t marks = 0) {
  Record r;
  r.output = std::move(b);
  r.marks = marks;
  return r;
}

// Locality-1 greedy coloring: smallest color unused by processed neighbors.
SlocalAlgorithm greedy_coloring() {
  return {"greedy_coloring", constant_locality(1), [](View& v) {
            std::set<int> used;
            for (const auto& inc : v.incident(v.root()))
              if (const auto* r = v.record(inc.other)) used.insert(r->output.as<int>());
            int c = 0;
            while (used.count(c)) ++c;
            return out_record(Blob::of(c));
          }};
}

// Locality-r greedy independent set: join unless a processed member is near.
SlocalAlgorithm greedy_mis(int r) {
  return {"greedy_mis", constant_locality(r), [r](View& v) {
            const bool join = !v.nearest_marked(1, r);
            return out_record(Blob::of(join), join ? 1 : 0);
          }};
}

// Locality-1: number of neighbors whose dependency output is true.
SlocalAlgorithm count_marked_neighbors() {
  return {"count", constant_locality(1), [](View& v) {
            int c = 0;
            for (const auto& inc : v.incident(v.root()))
              if (v.dep(inc.other).output.as<bool>()) ++c;
            return out_record(Blob::of(c));
          }};
}

SlocalAlgorithm degree_label() {
  return {"degree", constant_locality(0),
          [](View& v) { return out_record(Blob::of(static_cast<int>(v.degree(v.root())))); }};
}

SlocalAlgorithm sum_neighbor_degrees() {
  return {"sum", constant_locality(1), [](View& v) {
            int s = v.dep(v.root()).output.as<int>();
            for (const auto& inc : v.incident(v.root())) s += v.dep(inc.other).output.as<int>();
            return out_record(Blob::of(s));
          }};
}

SlocalAlgorithm max_id_within(int reach, int declared) {
  return {"max_id", constant_locality(declared), [reach](View& v) {
            Identifier m = 0;
            for (NodeId u : v.explore(v.root(), reach, [](NodeId) { return true; })) m = std::max(m, v.id(u));
            return out_record(Blob::of(m));
          }};
}

std::vector<Blob> staged(const World& w, const SlocalAlgorithm& a, const SlocalAlgorithm& b,
                         const std::vector<NodeId>& sched, const SlocalRun& composed) {
  auto it = composed.orders.find(2);
  std::vector<NodeId> inner = it == composed.orders.end() ? std::vector<NodeId>{} : it->second;
  auto ra = run_slocal(w, complete_order(inner, sched), a);
  return run_slocal(w, sched, b, &ra.records).outputs();
}

}  // namespace

TEST(View, RadiusZeroSeesIncidentEdges) {
  auto g = path_graph(3);
  auto w = make_world(g);
  Engine eng(w);
  View v(eng, 1, 0);
  auto s = snapshot(v);
  EXPECT_EQ(s.nodes, (std::vector<NodeId>{1}));
  EXPECT_EQ(s.edges, (std::vector<EdgeId>{0, 1}));
  EXPECT_THROW(v.id(0), LocalityViolation);
  EXPECT_THROW(v.id(2), LocalityViolation);
}

TEST(View, RadiusOneOnPath) {
  auto g = path_graph(3);
  auto w = make_world(g);
  Engine eng(w);
  View v(eng, 0, 1);
  auto s = snapshot(v);
  EXPECT_EQ(s.nodes, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(s.edges, (std::vector<EdgeId>{0, 1}));
  EXPECT_EQ(v.max_charge(), 1);
}

TEST(View, UnreachedNodeIsRejected) {
  auto g = path_graph(5);
  auto w = make_world(g);
  Engine eng(w);
  View v(eng, 0, 10);
  EXPECT_THROW(v.id(4), LocalityViolation);
}

TEST(View, MonotoneInRadius) {
  auto g = random_simple_graph(60, 80, 5);
  auto w = make_world(g);
  Engine eng(w);
  for (NodeId root = 0; root < 60; root += 11)
    for (int r = 0; r < 5; ++r) {
      View a(eng, root, r), b(eng, root, r + 1);
      auto sa = snapshot(a), sb = snapshot(b);
      EXPECT_TRUE(std::includes(sb.nodes.begin(), sb.nodes.end(), sa.nodes.begin(), sa.nodes.end()));
      EXPECT_TRUE(std::includes(sb.edges.begin(), sb.edges.end(), sa.edges.begin(), sa.edges.end()));
      EXPECT_EQ(sa.nodes, ball(g, root, r));
    }
}

TEST(RunLocal, Examples) {
  auto tri = complete_graph(3);
  auto w = make_world(tri);
  LocalAlgorithm constant{"c", constant_locality(0), [](View&) { return Blob::of(7); }};
  for (const auto& b : run_local(w, constant)) EXPECT_EQ(b.as<int>(), 7);

  auto w2 = make_world(tri, {10, 20, 30});
  LocalAlgorithm echo{"echo", constant_locality(0), [](View& v) { return Blob::of(v.id(v.root())); }};
  auto out = run_local(w2, echo);
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(out[v].as<Identifier>(), w2.ids[v]);

  auto star = star_graph(3);
  auto ws = make_world(star);
  LocalAlgorithm deg{"deg", constant_locality(1), [](View& v) { return Blob::of(v.degree(v.root())); }};
  auto d = run_local(ws, deg);
  EXPECT_EQ(d[0].as<std::size_t>(), 3u);
  for (NodeId v = 1; v < 4; ++v) EXPECT_EQ(d[v].as<std::size_t>(), 1u);
}

TEST(RunLocal, OrderDoesNotMatter) {
  auto g = random_regular(50, 3, 2);
  auto w = make_world(g, make_ids(g, IdKind::random, 3));
  auto a = max_id_within(2, 2);
  LocalAlgorithm la{"max", constant_locality(2), [&](View& v) { return a.step(v).output; }};
  EXPECT_EQ(run_local(w, la), run_local(w, la, make_schedule(g, ScheduleKind::random, 9)));
}

TEST(RunLocal, ErrorsAreTaggedWithNode) {
  auto g = path_graph(3);
  auto w = make_world(g);
  LocalAlgorithm bad{"bad", constant_locality(0), [](View& v) -> Blob {
                       if (v.root() == 2) throw std::runtime_error("boom");
                       return Blob::of(0);
                     }};
  try {
    run_local(w, bad);
    FAIL();
  } catch (const ExecutionError& e) {
    EXPECT_EQ(e.node, 2u);
    EXPECT_TRUE(e.caused_by<std::runtime_error>());
  }
}

TEST(RunSlocal, GreedyColoringIsProper) {
  auto g = path_graph(40);
  auto w = make_world(g);
  for (auto [name, kind] : schedule_kinds()) {
    auto run = run_slocal(w, make_schedule(g, kind, 3), greedy_coloring());
    for (auto [u, v] : g.edges()) EXPECT_NE(run.records[u].output.as<int>(), run.records[v].output.as<int>()) << name;
    for (auto& r : run.records) EXPECT_LT(r.output.as<int>(), 3);
    EXPECT_LE(run.measured_radius, 1);
  }
}

TEST(RunSlocal, SingleNodeAndCountingStates) {
  auto one = path_graph(1);
  auto w1 = make_world(one);
  EXPECT_EQ(run_slocal(w1, {0}, greedy_coloring()).records[0].output.as<int>(), 0);

  auto edge = path_graph(2);
  auto w = make_world(edge);
  SlocalAlgorithm counting{"count_processed", constant_locality(1), [](View& v) {
                             int c = 0;
                             for (const auto& inc : v.incident(v.root()))
                               if (v.record(inc.other)) ++c;
                             Record r;
                             r.state = Blob::of(c);
                             r.output = r.state;
                             return r;
                           }};
  auto run = run_slocal(w, {0, 1}, counting);
  EXPECT_EQ(run.records[0].state.as<int>(), 0);
  EXPECT_EQ(run.records[1].state.as<int>(), 1);
}

TEST(RunSlocal, DeterministicAndChecksSchedule) {
  auto g = random_regular(80, 3, 4);
  auto w = make_world(g);
  auto s = make_schedule(g, ScheduleKind::random, 5);
  EXPECT_EQ(run_slocal(w, s, greedy_mis(3)).outputs(), run_slocal(w, s, greedy_mis(3)).outputs());
  EXPECT_THROW(run_slocal(w, {0, 1}, greedy_mis(3)), std::invalid_argument);
}

TEST(RunSlocal, LocalityViolationIsDetected) {
  auto g = path_graph(10);
  auto w = make_world(g);
  EXPECT_THROW(run_slocal(w, iota_order(10), max_id_within(3, 2)), LocalityViolation);
}

TEST(RunSlocal, IndexAndScanAgree) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = random_simple_graph(120, 180, seed);
    auto w = make_world(g, make_ids(g, IdKind::random, seed));
    auto s = make_schedule(g, ScheduleKind::random, seed);
    ExecOptions scan;
    scan.use_index = false;
    for (int r : {1, 2, 3}) {
      auto a = run_slocal(w, s, greedy_mis(r));
      auto b = run_slocal(w, s, greedy_mis(r), nullptr, scan);
      EXPECT_EQ(a.outputs(), b.outputs());
      EXPECT_LE(a.measured_radius, r);
      EXPECT_LE(b.measured_radius, r);
    }
  }
}

TEST(Perturbation, ConstantPassesAndOverreachFails) {
  auto g = path_graph(30);
  auto w = make_world(g);
  SlocalAlgorithm constant{"c", constant_locality(0), [](View&) { return out_record(Blob::of(1)); }};
  auto s = iota_order(30);
  for (int r : {0, 1, 3}) EXPECT_TRUE(perturbation_check(w, constant, s, 15, r, 20, 1).pass);
  auto res = perturbation_check(w, max_id_within(2, 1), s, 15, 1, 20, 1);
  EXPECT_FALSE(res.pass);
  EXPECT_FALSE(res.witness.empty());
  EXPECT_TRUE(perturbation_check(w, max_id_within(2, 2), s, 15, 2, 20, 1).pass);
}

TEST(Perturbation, StatefulAlgorithmPassesAtItsLocality) {
  auto g = cycle_graph(60);
  auto w = make_world(g);
  auto s = make_schedule(g, ScheduleKind::random, 2);
  for (NodeId v : {s[30], s[45]}) EXPECT_TRUE(perturbation_check(w, greedy_mis(3), s, v, 3, 30, 7).pass);
  // Checked at a smaller radius the MIS step reads beyond it.
  bool any_fail = false;
  for (std::size_t i = 10; i < 60 && !any_fail; ++i)
    any_fail = !perturbation_check(w, greedy_mis(3), s, s[i], 1, 10, 7).pass;
  EXPECT_TRUE(any_fail);
}

TEST(Compose, NoOpInnerAlgorithm) {
  auto g = path_graph(12);
  auto w = make_world(g);
  SlocalAlgorithm noop{"noop", constant_locality(0), [](View&) { return out_record(Blob::of(false)); }};
  auto c = compose_slocal(noop, greedy_coloring());
  EXPECT_EQ(c.locality(12), 2);
  auto s = make_schedule(g, ScheduleKind::random, 1);
  EXPECT_EQ(run_slocal(w, s, c).outputs(), run_slocal(w, s, greedy_coloring()).outputs());
}

TEST(Compose, DegreeThenNeighborSum) {
  auto g = random_simple_graph(50, 90, 3);
  auto w = make_world(g);
  auto c = compose_slocal(degree_label(), sum_neighbor_degrees());
  EXPECT_EQ(c.locality(50), 2);
  auto s = make_schedule(g, ScheduleKind::reverse);
  auto run = run_slocal(w, s, c);
  EXPECT_LE(run.measured_radius, 2);
  EXPECT_EQ(run.outputs(), staged(w, degree_label(), sum_neighbor_degrees(), s, run));
}

TEST(Compose, OrderDependentInnerMatchesStagedReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = random_regular(100, 3, seed);
    auto w = make_world(g, make_ids(g, IdKind::random, seed));
    auto s = make_schedule(g, ScheduleKind::random, seed + 1);
    auto a = greedy_mis(2);
    auto b = count_marked_neighbors();
    auto c = compose_slocal(a, b);
    EXPECT_EQ(c.locality(100), 4);
    auto run = run_slocal(w, s, c);
    EXPECT_LE(run.measured_radius, 4);
    EXPECT_EQ(run.outputs(), staged(w, a, b, s, run));
    // Each inner record computed at most once.
    std::set<NodeId> distinct(run.orders[2].begin(), run.orders[2].end());
    EXPECT_EQ(distinct.size(), run.publications[2]);
    EXPECT_TRUE(perturbation_check(w, c, s, s[50], 4, 20, seed).pass);
  }
}

TEST(Compose, Nested) {
  auto g = cycle_graph(80);
  auto w = make_world(g);
  auto inner = compose_slocal(greedy_mis(2), count_marked_neighbors());
  SlocalAlgorithm outer_b{"max_count", constant_locality(1), [](View& v) {
                            int m = v.dep(v.root()).output.as<int>();
                            for (const auto& inc : v.incident(v.root())) m = std::max(m, v.dep(inc.other).output.as<int>());
                            return out_record(Blob::of(m));
                          }};
  auto c = compose_slocal(inner, outer_b);
  EXPECT_EQ(c.locality(80), 6);
  auto s = make_schedule(g, ScheduleKind::interleave);
  auto run = run_slocal(w, s, c);
  EXPECT_LE(run.measured_radius, 6);
  EXPECT_EQ(run.orders.count(4), 1u);
  auto ra = run_slocal(w, complete_order(run.orders[4], s), greedy_mis(2));
  auto rb = run_slocal(w, complete_order(run.orders[2], s), count_marked_neighbors(), &ra.records);
  auto rc = run_slocal(w, s, outer_b, &rb.records);
  EXPECT_EQ(run.outputs(), rc.outputs());
  EXPECT_TRUE(perturbation_check(w, c, s, s[40], 6, 20, 3).pass);
}

TEST(Schedules, ArePermutations) {
  auto g = random_simple_graph(70, 100, 1);
  for (auto [name, kind] : schedule_kinds()) {
    auto s = make_schedule(g, kind, 4);
    EXPECT_NO_THROW(check_schedule(s, 70)) << name;
  }
  EXPECT_EQ(make_schedule(g, ScheduleKind::random, 4), make_schedule(g, ScheduleKind::random, 4));
  EXPECT_THROW(parse_schedule("sideways"), std::invalid_argument);
}

TEST(Identifiers, InjectiveAndInRange) {
  auto g = random_simple_graph(300, 600, 2);
  for (auto kind : {IdKind::identity, IdKind::random, IdKind::degree}) {
    auto ids = make_ids(g, kind, 5);
    std::set<Identifier> s(ids.begin(), ids.end());
    EXPECT_EQ(s.size(), 300u);
    EXPECT_GE(*s.begin(), 1u);
    EXPECT_LE(*s.rbegin(), 300u * 300u);
  }
  auto ids = make_ids(g, IdKind::degree, 5);
  for (NodeId u = 0; u < 300; ++u)
    for (NodeId v = 0; v < 300; ++v)
      if (g.degree(u) > g.degree(v)) {
        EXPECT_LT(ids[u], ids[v]);
      }
}
