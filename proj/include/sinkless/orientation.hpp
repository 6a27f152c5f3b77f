#pragma once

// Orientations, labelings over {O, I}, and the validators that define a
// correct sinkless orientation.

#include <algorithm>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sinkless/edge_set.hpp"
#include "sinkless/graph.hpp"

namespace sinkless {

inline constexpr NodeId kNoHead = std::numeric_limits<NodeId>::max();

class OrientationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge-id keyed map to the head (the endpoint the edge points to). Entries
/// equal to kNoHead are undecided.
struct Orientation {
  std::vector<NodeId> head;

  Orientation() = default;
  explicit Orientation(std::size_t m) : head(m, kNoHead) {}

  bool decided(EdgeId e) const { return head[e] != kNoHead; }
  bool total() const {
    return std::none_of(head.begin(), head.end(), [](NodeId h) { return h == kNoHead; });
  }
  friend bool operator==(const Orientation&, const Orientation&) = default;
};

inline void check_orientation(const Multigraph& g, const Orientation& o, bool need_total) {
  if (o.head.size() != g.edge_count()) throw OrientationError("orientation size does not match edge count");
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (o.head[e] == kNoHead) {
      if (need_total) throw OrientationError("partial orientation: edge " + std::to_string(e) + " undecided");
      continue;
    }
    if (!g.has_endpoint(e, o.head[e]))
      throw OrientationError("edge " + std::to_string(e) + " oriented to a non-endpoint");
  }
}

enum class Label : std::uint8_t { O, I };
inline char to_char(Label l) { return l == Label::O ? 'O' : 'I'; }

/// One label per edge; the label belongs to the edge's active endpoint.
struct EdgeLabeling {
  std::vector<std::optional<Label>> label;

  EdgeLabeling() = default;
  explicit EdgeLabeling(std::size_t m) : label(m) {}
  friend bool operator==(const EdgeLabeling&, const EdgeLabeling&) = default;
};

enum class ViolationKind { sink, passive_sink, active_sink, missing_label };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::sink: return "sink";
    case ViolationKind::passive_sink: return "passive_sink";
    case ViolationKind::active_sink: return "active_sink";
    case ViolationKind::missing_label: return "missing_label";
  }
  return "?";
}

struct Violation {
  NodeId node;
  ViolationKind kind;
  std::size_t degree;
  friend bool operator==(const Violation&, const Violation&) = default;
};

using ViolationReport = std::vector<Violation>;

namespace detail {

inline ViolationReport sinks_at_least(const Multigraph& g, const Orientation& o, std::size_t min_degree) {
  check_orientation(g, o, true);
  ViolationReport out;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto d = g.degree(v);
    if (d < min_degree) continue;
    const auto inc = g.incident(v);
    const bool has_out = std::any_of(inc.begin(), inc.end(), [&](const Incidence& i) { return o.head[i.edge] != v; });
    if (!has_out) out.push_back({v, ViolationKind::sink, d});
  }
  return out;
}

}  // namespace detail

inline ViolationReport validate_sinkless(const Multigraph& g, const Orientation& o) {
  return detail::sinks_at_least(g, o, 3);
}

/// Only nodes of degree >= floor(log2 n)+1 may violate, with n taken from
/// `n_threshold_source` rather than from g.
inline ViolationReport validate_high_degree(const Multigraph& g, const Orientation& o,
                                            std::uint64_t n_threshold_source) {
  return detail::sinks_at_least(g, o, static_cast<std::size_t>(high_degree_threshold(n_threshold_source)));
}

inline NodeId active_endpoint(const Multigraph& g, const TwoColoring& c, Color active, EdgeId e) {
  const auto [u, v] = g.endpoints(e);
  return c[u] == active ? u : v;
}

/// Bipartite encoding check: active nodes of input-degree >= 3 need an O,
/// passive nodes of input-degree >= 3 need an incident I.
inline ViolationReport validate_bipartite(const Multigraph& g, const TwoColoring& coloring, const EdgeSet& input,
                                          Color active, const EdgeLabeling& lab) {
  if (!is_proper_two_coloring(g, coloring)) throw OrientationError("coloring is not a proper 2-coloring");
  ViolationReport out;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::size_t deg = 0;
    bool has_o = false, has_i = false;
    for (const auto& inc : g.incident(v)) {
      if (!input.test(inc.edge)) continue;
      ++deg;
      const auto& l = lab.label[inc.edge];
      if (!l) {
        if (coloring[v] == active) out.push_back({v, ViolationKind::missing_label, 0});
        continue;
      }
      (*l == Label::O ? has_o : has_i) = true;
    }
    for (auto& viol : out)
      if (viol.node == v && viol.kind == ViolationKind::missing_label) viol.degree = deg;
    if (deg < 3) continue;
    if (coloring[v] == active && !has_o) out.push_back({v, ViolationKind::active_sink, deg});
    if (coloring[v] != active && !has_i) out.push_back({v, ViolationKind::passive_sink, deg});
  }
  return out;
}

// O on an edge with active endpoint a means the edge points away from a.
inline EdgeLabeling orientation_to_labeling(const Multigraph& g, const Orientation& o, const TwoColoring& coloring,
                                            Color active, const EdgeSet& input) {
  EdgeLabeling lab(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!input.test(e) || !o.decided(e)) continue;
    lab.label[e] = o.head[e] == active_endpoint(g, coloring, active, e) ? Label::I : Label::O;
  }
  return lab;
}

inline Orientation labeling_to_orientation(const Multigraph& g, const EdgeLabeling& lab, const TwoColoring& coloring,
                                           Color active) {
  Orientation o(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!lab.label[e]) continue;
    const NodeId a = active_endpoint(g, coloring, active, e);
    o.head[e] = *lab.label[e] == Label::I ? a : g.other(e, a);
  }
  return o;
}

inline std::vector<Identifier> identity_ids(std::size_t n) {
  std::vector<Identifier> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i + 1;
  return ids;
}

namespace detail {

/// Cycle closed by the first non-tree edge of an iterative DFS from `start`,
/// neighbors visited by ascending Identifier then EdgeId. Returned as
/// (edge, head) pairs oriented consistently around the cycle.
inline std::vector<std::pair<EdgeId, NodeId>> first_dfs_cycle(const Multigraph& g, std::span<const Identifier> ids,
                                                              NodeId start) {
  std::vector<char> state(g.node_count(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<EdgeId> parent_edge(g.node_count(), std::numeric_limits<EdgeId>::max());
  std::vector<NodeId> parent(g.node_count(), kNoHead);
  struct Frame {
    NodeId v;
    std::vector<Incidence> order;
    std::size_t next;
  };
  const auto sorted_incidence = [&](NodeId v) {
    auto inc = g.incident(v);
    std::vector<Incidence> out(inc.begin(), inc.end());
    std::sort(out.begin(), out.end(), [&](const Incidence& a, const Incidence& b) {
      if (ids[a.other] != ids[b.other]) return ids[a.other] < ids[b.other];
      return a.edge < b.edge;
    });
    return out;
  };
  std::vector<Frame> stack;
  stack.push_back({start, sorted_incidence(start), 0});
  state[start] = 1;
  while (!stack.empty()) {
    auto& f = stack.back();
    if (f.next == f.order.size()) {
      state[f.v] = 2;
      stack.pop_back();
      continue;
    }
    const auto inc = f.order[f.next++];
    if (inc.edge == parent_edge[f.v]) continue;
    if (state[inc.other] == 1) {
      // inc.other -> ... -> f.v along the stack, closed by inc.edge.
      std::vector<std::pair<EdgeId, NodeId>> cycle{{inc.edge, inc.other}};
      for (NodeId x = f.v; x != inc.other; x = parent[x]) cycle.emplace_back(parent_edge[x], x);
      return cycle;
    }
    if (state[inc.other] == 0) {
      state[inc.other] = 1;
      parent[inc.other] = f.v;
      parent_edge[inc.other] = inc.edge;
      stack.push_back({inc.other, sorted_incidence(inc.other), 0});
    }
  }
  return {};
}

/// Orients the undecided edges of component `comp` so every non-target node
/// points to its lowest-Identifier neighbor one BFS step closer to the
/// targets; leftover edges point to the lower-Identifier endpoint.
inline void orient_toward(const Multigraph& g, const std::vector<NodeId>& comp, const std::vector<NodeId>& targets,
                          std::span<const Identifier> ids, Orientation& o) {
  std::vector<int> dist(g.node_count(), kUnreached);
  std::vector<NodeId> queue;
  for (NodeId t : targets) {
    dist[t] = 0;
    queue.push_back(t);
  }
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (const auto& inc : g.incident(queue[h]))
      if (dist[inc.other] == kUnreached) {
        dist[inc.other] = dist[queue[h]] + 1;
        queue.push_back(inc.other);
      }
  for (NodeId v : comp) {
    if (dist[v] <= 0) continue;
    const Incidence* best = nullptr;
    for (const auto& inc : g.incident(v))
      if (dist[inc.other] == dist[v] - 1 && o.head[inc.edge] == kNoHead &&
          (!best || ids[inc.other] < ids[best->other]))
        best = &inc;
    if (best) o.head[best->edge] = best->other;
  }
  for (NodeId v : comp)
    for (const auto& inc : g.incident(v))
      if (o.head[inc.edge] == kNoHead) o.head[inc.edge] = ids[v] < ids[inc.other] ? v : inc.other;
}

}  // namespace detail

/// Reference solution with global knowledge. Trees point to their
/// lowest-Identifier leaf. Otherwise the first cycle closed by a DFS from the
/// lowest-Identifier node (neighbors visited by ascending Identifier, then
/// EdgeId) is oriented consistently and every other node points along a
/// shortest path toward it, ties to the lower Identifier.
inline Orientation global_orientation(const Multigraph& g, std::span<const Identifier> ids = {}) {
  std::vector<Identifier> own;
  if (ids.empty()) {
    own = identity_ids(g.node_count());
    ids = own;
  }
  Orientation o(g.edge_count());
  for (auto& comp : connected_components(g)) {
    std::sort(comp.begin(), comp.end(), [&](NodeId a, NodeId b) { return ids[a] < ids[b]; });
    std::size_t comp_edges = 0;
    for (NodeId v : comp) comp_edges += g.degree(v);
    comp_edges /= 2;
    if (comp.size() == 1) continue;

    std::vector<NodeId> targets;
    if (comp_edges + 1 == comp.size()) {
      for (NodeId v : comp)
        if (g.degree(v) == 1) {
          targets.push_back(v);
          break;
        }
    } else {
      for (const auto& [e, head] : detail::first_dfs_cycle(g, ids, comp.front())) {
        o.head[e] = head;
        targets.push_back(head);
      }
    }
    detail::orient_toward(g, comp, targets, ids, o);
  }
  return o;
}

// "edge_id head_node" per line, decided edges only, ascending EdgeId.
inline void write_orientation(std::ostream& os, const Orientation& o) {
  for (EdgeId e = 0; e < o.head.size(); ++e)
    if (o.decided(e)) os << e << ' ' << o.head[e] << '\n';
}

inline Orientation read_orientation(std::istream& is, const Multigraph& g) {
  Orientation o(g.edge_count());
  long long e = -1, h = -1;
  while (is >> e >> h) {
    if (e < 0 || static_cast<std::size_t>(e) >= g.edge_count())
      throw OrientationError("orientation: edge id out of range: " + std::to_string(e));
    if (h < 0 || !g.has_endpoint(static_cast<EdgeId>(e), static_cast<NodeId>(h)))
      throw OrientationError("orientation: head is not an endpoint of edge " + std::to_string(e));
    if (o.decided(static_cast<EdgeId>(e))) throw OrientationError("orientation: duplicate edge " + std::to_string(e));
    o.head[e] = static_cast<NodeId>(h);
  }
  if (!is.eof()) throw OrientationError("orientation: malformed line");
  return o;
}

}  // namespace sinkless
