#pragma once

// Multigraph/graph representation, structural queries and generators.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sinkless {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Identifier = std::uint64_t;

inline constexpr int kUnreached = -1;

enum class Color : std::uint8_t { black, white };

inline Color opposite(Color c) { return c == Color::black ? Color::white : Color::black; }
inline const char* to_string(Color c) { return c == Color::black ? "black" : "white"; }

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Incidence {
  EdgeId edge;
  NodeId other;
};

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

/// Undirected multigraph with stable edge identities. Parallel edges are kept,
/// self-loops are rejected. Incidence lists are stored in CSR form, ordered by
/// EdgeId within each node.
class Multigraph {
 public:
  Multigraph() = default;

  Multigraph(std::size_t n, EdgeList edges) : n_(n), edges_(std::move(edges)) {
    for (const auto& [u, v] : edges_) {
      if (u >= n_ || v >= n_) {
        throw GraphError("edge endpoint out of range: (" + std::to_string(u) + "," +
                         std::to_string(v) + ") with n=" + std::to_string(n_));
      }
      if (u == v) throw GraphError("self-loop at node " + std::to_string(u));
    }
    offsets_.assign(n_ + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++offsets_[u + 1];
      ++offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    incidence_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      const auto [u, v] = edges_[e];
      incidence_[fill[u]++] = {e, v};
      incidence_[fill[v]++] = {e, u};
    }
  }

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::span<const Incidence> incident(NodeId v) const {
    return {incidence_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::pair<NodeId, NodeId> endpoints(EdgeId e) const { return edges_[e]; }
  const EdgeList& edges() const { return edges_; }

  NodeId other(EdgeId e, NodeId v) const {
    const auto [a, b] = edges_[e];
    return a == v ? b : a;
  }
  bool has_endpoint(EdgeId e, NodeId v) const {
    return edges_[e].first == v || edges_[e].second == v;
  }

  bool is_simple() const {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (auto [u, v] : edges_) {
      if (u > v) std::swap(u, v);
      if (!seen.emplace(u, v).second) return false;
    }
    return true;
  }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (NodeId v = 0; v < n_; ++v) d = std::max(d, degree(v));
    return d;
  }

  friend bool operator==(const Multigraph& a, const Multigraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  EdgeList edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> incidence_;
};

/// A multigraph with at most one edge per unordered node pair.
class Graph : public Multigraph {
 public:
  Graph() = default;
  Graph(std::size_t n, EdgeList edges) : Multigraph(n, std::move(edges)) {
    if (!is_simple()) throw GraphError("parallel edge in simple graph");
  }
  explicit Graph(Multigraph g) : Multigraph(std::move(g)) {
    if (!is_simple()) throw GraphError("parallel edge in simple graph");
  }
};

using TwoColoring = std::vector<Color>;

inline bool is_proper_two_coloring(const Multigraph& g, const TwoColoring& c) {
  if (c.size() != g.node_count()) return false;
  for (const auto& [u, v] : g.edges())
    if (c[u] == c[v]) return false;
  return true;
}

inline Multigraph build_multigraph(std::size_t n, EdgeList edges) {
  return Multigraph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Distances

/// Breadth-first distances from `source`, truncated at `limit` (negative: no
/// limit). Unreached nodes hold kUnreached.
inline std::vector<int> bfs_distances(const Multigraph& g, NodeId source, int limit = -1) {
  std::vector<int> dist(g.node_count(), kUnreached);
  std::vector<NodeId> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId x = queue[head];
    if (limit >= 0 && dist[x] >= limit) continue;
    for (const auto& inc : g.incident(x)) {
      if (dist[inc.other] == kUnreached) {
        dist[inc.other] = dist[x] + 1;
        queue.push_back(inc.other);
      }
    }
  }
  return dist;
}

/// Nodes at distance at most r from v, in ascending NodeId order.
inline std::vector<NodeId> ball(const Multigraph& g, NodeId v, int r) {
  const auto dist = bfs_distances(g, v, r);
  std::vector<NodeId> out;
  for (NodeId u = 0; u < g.node_count(); ++u)
    if (dist[u] != kUnreached) out.push_back(u);
  return out;
}

/// Length of the shortest cycle; nullopt for forests. Parallel edges count as
/// 2-cycles. BFS from every node, pruned at half the best cycle found so far.
inline std::optional<int> girth(const Multigraph& g) {
  int best = std::numeric_limits<int>::max();
  const std::size_t n = g.node_count();
  std::vector<int> dist(n, kUnreached);
  std::vector<EdgeId> via(n, 0);
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    queue.clear();
    queue.push_back(s);
    dist[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId x = queue[head];
      if (2 * dist[x] >= best) break;
      for (const auto& inc : g.incident(x)) {
        if (x != s && inc.edge == via[x]) continue;
        if (dist[inc.other] == kUnreached) {
          dist[inc.other] = dist[x] + 1;
          via[inc.other] = inc.edge;
          queue.push_back(inc.other);
        } else {
          best = std::min(best, dist[x] + dist[inc.other] + 1);
        }
      }
    }
    for (NodeId x : queue) dist[x] = kUnreached;
  }
  if (best == std::numeric_limits<int>::max()) return std::nullopt;
  return best;
}

/// Simple graph on the same nodes with {u,v} an edge iff 1 <= dist(u,v) <= k.
inline Graph power_graph(const Multigraph& g, int k) {
  if (k < 1) throw GraphError("power_graph exponent must be >= 1");
  EdgeList edges;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : ball(g, u, k))
      if (v > u) edges.emplace_back(u, v);
  }
  return Graph(g.node_count(), std::move(edges));
}

/// Bipartite double cover: node v becomes v (layer 0, black) and v+n (layer 1,
/// white); edge {u,v} becomes {u, v+n} and {v, u+n}, in that order.
inline std::pair<Graph, TwoColoring> bipartite_double_cover(const Multigraph& g) {
  const std::size_t n = g.node_count();
  EdgeList edges;
  edges.reserve(2 * g.edge_count());
  for (const auto& [u, v] : g.edges()) {
    edges.emplace_back(u, static_cast<NodeId>(v + n));
    edges.emplace_back(v, static_cast<NodeId>(u + n));
  }
  TwoColoring color(2 * n, Color::black);
  std::fill(color.begin() + static_cast<std::ptrdiff_t>(n), color.end(), Color::white);
  return {Graph(2 * n, std::move(edges)), std::move(color)};
}

inline bool is_regular(const Multigraph& g, std::size_t d) {
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (g.degree(v) != d) return false;
  return true;
}

inline std::vector<std::vector<NodeId>> connected_components(const Multigraph& g) {
  std::vector<int> seen(g.node_count(), 0);
  std::vector<std::vector<NodeId>> out;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> comp{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (const auto& inc : g.incident(comp[i]))
        if (!seen[inc.other]) {
          seen[inc.other] = 1;
          comp.push_back(inc.other);
        }
    out.push_back(std::move(comp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

inline Graph path_graph(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, std::move(e));
}

inline Graph cycle_graph(std::size_t n) {
  if (n < 3) throw GraphError("cycle needs at least 3 nodes");
  EdgeList e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return Graph(n, std::move(e));
}

inline Graph complete_graph(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, std::move(e));
}

inline Graph star_graph(std::size_t leaves) {
  EdgeList e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph(leaves + 1, std::move(e));
}

/// Nodes 0..a-1 black, a..a+b-1 white.
inline std::pair<Graph, TwoColoring> complete_bipartite(std::size_t a, std::size_t b) {
  EdgeList e;
  for (NodeId i = 0; i < a; ++i)
    for (NodeId j = 0; j < b; ++j) e.emplace_back(i, static_cast<NodeId>(a + j));
  TwoColoring c(a + b, Color::black);
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(a), c.end(), Color::white);
  return {Graph(a + b, std::move(e)), std::move(c)};
}

/// Random simple d-regular graph from the configuration model. Points are
/// paired one at a time; a pairing that would create a loop or a multi-edge is
/// re-drawn, and a dead end restarts the whole attempt.
inline Graph random_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
  if ((n * d) % 2 != 0) throw GraphError("random_regular: n*d must be even");
  if (d >= n && !(d == 0 && n == 0)) throw GraphError("random_regular: need d < n");
  std::mt19937_64 rng(seed);
  constexpr int kMaxRestarts = 200;
  for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
    std::vector<NodeId> points;
    points.reserve(n * d);
    for (NodeId v = 0; v < n; ++v)
      for (std::size_t k = 0; k < d; ++k) points.push_back(v);
    std::set<std::pair<NodeId, NodeId>> used;
    EdgeList edges;
    edges.reserve(n * d / 2);
    bool stuck = false;
    while (!points.empty()) {
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        NodeId u = points[i], v = points[j];
        if (u == v) continue;
        auto key = std::minmax(u, v);
        if (used.count({key.first, key.second})) continue;
        used.emplace(key.first, key.second);
        edges.emplace_back(key.first, key.second);
        if (i < j) std::swap(i, j);
        points[i] = points.back();
        points.pop_back();
        points[j] = points.back();
        points.pop_back();
        placed = true;
      }
      if (!placed) {
        stuck = true;
        break;
      }
    }
    if (!stuck) {
      std::sort(edges.begin(), edges.end());
      return Graph(n, std::move(edges));
    }
  }
  throw GraphError("random_regular: no simple pairing found after bounded restarts");
}

/// Uniform random recursive tree with shuffled labels.
inline Graph random_tree(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> label(n);
  for (NodeId i = 0; i < n; ++i) label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);
  EdgeList e;
  for (NodeId i = 1; i < n; ++i) {
    std::uniform_int_distribution<NodeId> parent(0, i - 1);
    e.emplace_back(label[parent(rng)], label[i]);
  }
  return Graph(n, std::move(e));
}

/// Random multigraph with m edges, endpoints uniform, loops re-drawn.
inline Multigraph random_multigraph(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 && m > 0) throw GraphError("random_multigraph: need two nodes for an edge");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  EdgeList e;
  while (e.size() < m) {
    NodeId u = pick(rng), v = pick(rng);
    if (u != v) e.emplace_back(u, v);
  }
  return Multigraph(n, std::move(e));
}

/// Random simple graph with about m edges (G(n,m) without repetition).
inline Graph random_simple_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  m = std::min(m, n * (n - 1) / 2);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::set<std::pair<NodeId, NodeId>> used;
  EdgeList e;
  while (e.size() < m) {
    NodeId u = pick(rng), v = pick(rng);
    if (u == v) continue;
    auto key = std::minmax(u, v);
    if (used.emplace(key.first, key.second).second) e.emplace_back(key.first, key.second);
  }
  return Graph(n, std::move(e));
}

namespace detail {

// GF(4) = {0, 1, a, a+1} encoded as 2-bit integers; a^2 = a + 1.
inline std::uint8_t gf4_mul(std::uint8_t x, std::uint8_t y) {
  static constexpr std::uint8_t table[4][4] = {
      {0, 0, 0, 0}, {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}};
  return table[x][y];
}

}  // namespace detail

/// Point-line incidence graph of the projective plane PG(2,4): 21 points
/// (black, nodes 0..20) and 21 lines (white, nodes 21..41). 5-regular,
/// bipartite, girth 6.
inline std::pair<Graph, TwoColoring> projective_plane_incidence_order4() {
  using Vec = std::array<std::uint8_t, 3>;
  std::vector<Vec> pts;
  for (std::uint8_t a = 0; a < 4; ++a)
    for (std::uint8_t b = 0; b < 4; ++b)
      for (std::uint8_t c = 0; c < 4; ++c) {
        Vec v{a, b, c};
        auto lead = std::find_if(v.begin(), v.end(), [](auto x) { return x != 0; });
        if (lead != v.end() && *lead == 1) pts.push_back(v);
      }
  const std::size_t k = pts.size();  // 21
  EdgeList e;
  for (NodeId p = 0; p < k; ++p)
    for (NodeId l = 0; l < k; ++l) {
      std::uint8_t dot = 0;
      for (int i = 0; i < 3; ++i) dot ^= detail::gf4_mul(pts[p][i], pts[l][i]);
      if (dot == 0) e.emplace_back(p, static_cast<NodeId>(k + l));
    }
  TwoColoring c(2 * k, Color::black);
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(k), c.end(), Color::white);
  return {Graph(2 * k, std::move(e)), std::move(c)};
}

struct Fixture {
  std::string name;
  Graph graph;
  TwoColoring coloring;
};

inline std::vector<std::string> fixture_names() { return {"k55", "k6_cover", "pg24"}; }

/// Shipped support graphs: complete bipartite 5+5, double cover of K6 (12
/// nodes, girth 4) and the PG(2,4) incidence graph (42 nodes, girth 6).
inline Fixture fixture(const std::string& name) {
  if (name == "k55") {
    auto [g, c] = complete_bipartite(5, 5);
    return {name, std::move(g), std::move(c)};
  }
  if (name == "k6_cover") {
    auto [g, c] = bipartite_double_cover(complete_graph(6));
    return {name, std::move(g), std::move(c)};
  }
  if (name == "pg24") {
    auto [g, c] = projective_plane_incidence_order4();
    return {name, std::move(g), std::move(c)};
  }
  throw GraphError("unknown fixture: " + name);
}

// ---------------------------------------------------------------------------
// Edge-list text format: "n m" then m lines "u v", edges in EdgeId order.

inline void write_edge_list(std::ostream& os, const Multigraph& g) {
  os << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline std::string to_edge_list(const Multigraph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

inline Multigraph read_edge_list(std::istream& is) {
  long long n = -1, m = -1;
  if (!(is >> n >> m) || n < 0 || m < 0) throw GraphError("edge list: bad header");
  EdgeList edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = -1, v = -1;
    if (!(is >> u >> v)) throw GraphError("edge list: expected " + std::to_string(m) +
                                          " edges, got " + std::to_string(i));
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw GraphError("edge list: endpoint out of range on edge " + std::to_string(i));
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  std::string extra;
  if (is >> extra) throw GraphError("edge list: trailing content");
  return Multigraph(static_cast<std::size_t>(n), std::move(edges));
}

inline Multigraph parse_edge_list(const std::string& text) {
  std::istringstream is(text);
  return read_edge_list(is);
}

// floor(log2 n) + 1 for n >= 1, computed as the bit length.
inline int high_degree_threshold(std::uint64_t n) {
  if (n == 0) throw GraphError("threshold undefined for n = 0");
  return static_cast<int>(std::bit_width(n));
}

}  // namespace sinkless
