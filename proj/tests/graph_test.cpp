#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "sinkless/graph.hpp"

using namespace sinkless;

namespace {

// Floyd-Warshall distance table, independent of the BFS code under test.
std::vector<std::vector<int>> all_pairs(const Multigraph& g) {
  const int inf = 1 << 20;
  const std::size_t n = g.node_count();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Brute-force girth: shortest cycle through each edge = 1 + distance between
// its endpoints with that edge removed.
std::optional<int> girth_oracle(const Multigraph& g) {
  std::optional<int> best;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    EdgeList rest;
    for (EdgeId f = 0; f < g.edge_count(); ++f)
      if (f != e) rest.push_back(g.endpoints(f));
    Multigraph h(g.node_count(), rest);
    auto [u, v] = g.endpoints(e);
    int d = all_pairs(h)[u][v];
    if (d < (1 << 20) && (!best || d + 1 < *best)) best = d + 1;
  }
  return best;
}

}  // namespace

TEST(Multigraph, ParallelEdgesKeepDistinctIds) {
  auto g = build_multigraph(2, {{0, 1}, {0, 1}, {0, 1}});
  EXPECT_EQ(g.degree(0), 3u);
  EXPECT_EQ(g.degree(1), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_FALSE(g.is_simple());
  EXPECT_THROW(Graph(2, {{0, 1}, {1, 0}}), GraphError);
}

TEST(Multigraph, RejectsLoopsAndRange) {
  EXPECT_THROW(build_multigraph(1, {{0, 0}}), GraphError);
  EXPECT_THROW(build_multigraph(2, {{0, 2}}), GraphError);
}

TEST(Multigraph, DegreeSumIsTwiceEdgeCount) {
  auto g = random_multigraph(50, 300, 7);
  std::size_t sum = 0;
  for (NodeId v = 0; v < 50; ++v) {
    sum += g.degree(v);
    for (auto inc : g.incident(v)) EXPECT_TRUE(g.has_endpoint(inc.edge, v));
  }
  EXPECT_EQ(sum, 600u);
}

TEST(Ball, SmallCases) {
  auto tri = complete_graph(3);
  EXPECT_EQ(ball(tri, 0, 0), (std::vector<NodeId>{0}));
  EXPECT_EQ(ball(tri, 0, 1), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(ball(path_graph(4), 0, 2), (std::vector<NodeId>{0, 1, 2}));
}

TEST(Ball, MonotoneInRadius) {
  auto g = random_simple_graph(60, 90, 3);
  for (NodeId v = 0; v < 60; v += 7) {
    EXPECT_EQ(ball(g, v, 0).size(), 1u);
    for (int r = 0; r < 6; ++r) {
      auto a = ball(g, v, r), b = ball(g, v, r + 1);
      EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST(Girth, KnownValues) {
  EXPECT_EQ(girth(complete_graph(3)), 3);
  EXPECT_EQ(girth(random_tree(40, 1)), std::nullopt);
  EXPECT_EQ(girth(complete_bipartite(5, 5).first), 4);
  EXPECT_EQ(girth(cycle_graph(9)), 9);
  EXPECT_EQ(girth(build_multigraph(3, {{0, 1}, {1, 2}, {1, 2}})), 2);
}

TEST(Girth, MatchesEdgeRemovalOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto g = random_simple_graph(14, 16 + seed % 8, seed);
    EXPECT_EQ(girth(g), girth_oracle(g)) << "seed " << seed;
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = random_multigraph(8, 10, seed);
    EXPECT_EQ(girth(g), girth_oracle(g)) << "seed " << seed;
  }
}

TEST(PowerGraph, AgreesWithDistanceTable) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto g = random_simple_graph(40 + seed * 3, 50, seed);
    auto d = all_pairs(g);
    for (int k = 1; k <= 4; ++k) {
      auto p = power_graph(g, k);
      std::set<std::pair<NodeId, NodeId>> have(p.edges().begin(), p.edges().end());
      for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v = u + 1; v < g.node_count(); ++v)
          EXPECT_EQ(have.count({u, v}) == 1, d[u][v] <= k);
    }
  }
}

TEST(PowerGraph, SixCycleCubedIsK6) {
  auto p = power_graph(cycle_graph(6), 3);
  EXPECT_EQ(p.edge_count(), 15u);
  EXPECT_TRUE(is_regular(p, 5));
  EXPECT_EQ(power_graph(path_graph(3), 2).edge_count(), 3u);
  EXPECT_THROW(power_graph(path_graph(3), 0), GraphError);
}

TEST(DoubleCover, Examples) {
  auto [c5, col5] = bipartite_double_cover(cycle_graph(5));
  EXPECT_EQ(c5.node_count(), 10u);
  EXPECT_TRUE(is_regular(c5, 2));
  EXPECT_EQ(connected_components(c5).size(), 1u);
  EXPECT_EQ(girth(c5), 10);

  auto [e2, cole] = bipartite_double_cover(path_graph(2));
  EXPECT_EQ(e2.edge_count(), 2u);
  EXPECT_EQ(connected_components(e2).size(), 2u);

  auto [k6c, col6] = bipartite_double_cover(complete_graph(6));
  EXPECT_EQ(k6c.node_count(), 12u);
  EXPECT_TRUE(is_regular(k6c, 5));
  EXPECT_TRUE(is_proper_two_coloring(k6c, col6));
  EXPECT_EQ(girth(k6c), girth_oracle(k6c));
  EXPECT_EQ(girth(k6c), 4);
}

TEST(DoubleCover, PreservesRegularityAndGirth) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = random_regular(20, 3, seed);
    auto [c, col] = bipartite_double_cover(g);
    EXPECT_TRUE(is_regular(c, 3));
    EXPECT_TRUE(is_proper_two_coloring(c, col));
    EXPECT_GE(*girth(c), *girth(g));
  }
}

TEST(Fixtures, Shape) {
  for (const auto& name : fixture_names()) {
    auto f = fixture(name);
    EXPECT_TRUE(is_regular(f.graph, 5)) << name;
    EXPECT_TRUE(is_proper_two_coloring(f.graph, f.coloring)) << name;
  }
  auto pg = fixture("pg24");
  EXPECT_EQ(pg.graph.node_count(), 42u);
  EXPECT_EQ(pg.graph.edge_count(), 105u);
  EXPECT_EQ(girth(pg.graph), 6);
  EXPECT_EQ(girth(fixture("k55").graph), 4);
  EXPECT_THROW(fixture("nope"), GraphError);
}

TEST(RandomRegular, Examples) {
  EXPECT_EQ(random_regular(4, 3, 11).edge_count(), 6u);
  EXPECT_EQ(random_regular(6, 5, 11).edge_count(), 15u);
  EXPECT_THROW(random_regular(5, 3, 1), GraphError);
  auto a = random_regular(200, 5, 42), b = random_regular(200, 5, 42);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(is_regular(a, 5));
  EXPECT_TRUE(a.is_simple());
}

TEST(RandomTree, IsTree) {
  auto t = random_tree(500, 9);
  EXPECT_EQ(t.edge_count(), 499u);
  EXPECT_EQ(connected_components(t).size(), 1u);
}

TEST(EdgeListFormat, RoundTripAndErrors) {
  auto g = random_multigraph(10, 25, 5);
  EXPECT_EQ(parse_edge_list(to_edge_list(g)), g);
  EXPECT_THROW(parse_edge_list("3 2\n0 1\n"), GraphError);
  EXPECT_THROW(parse_edge_list("3 1\n0 3\n"), GraphError);
  EXPECT_THROW(parse_edge_list("3 1\n0 1\n1 2\n"), GraphError);
  EXPECT_THROW(parse_edge_list("x"), GraphError);
}

TEST(Threshold, BitLength) {
  EXPECT_EQ(high_degree_threshold(1024), 11);
  EXPECT_EQ(high_degree_threshold(2), 2);
  EXPECT_EQ(high_degree_threshold(17), 5);
  EXPECT_EQ(high_degree_threshold(1), 1);
  EXPECT_THROW(high_degree_threshold(0), GraphError);
}
