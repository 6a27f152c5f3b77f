#pragma once

// Sinkless orientation in SLOCAL with locality O(log log n): greedy
// high-degree orientation on multigraphs, power-graph clustering, the cluster
// graph, and the three-stage pipeline joined by compose_slocal.

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sinkless/graph.hpp"
#include "sinkless/models.hpp"
#include "sinkless/orientation.hpp"

namespace sinkless {

/// T = ceil(log2(floor(log2 n) + 1)).
inline int t_param(std::uint64_t n) {
  if (n < 2) throw std::invalid_argument("t_param needs n >= 2");
  const auto th = static_cast<std::uint64_t>(high_degree_threshold(n));
  return static_cast<int>(std::bit_width(th - 1));
}

// ---------------------------------------------------------------------------
// Greedy high-degree orientation

enum class GreedyRule { fewer_processed, first_endpoint, more_processed };

/// Head for edge {u, v} given both endpoints' status. Rule 1: toward a
/// satisfied endpoint. Rule 2: toward the endpoint with fewer processed
/// incident edges. Ties go to the lower Identifier. Returns (head, rule).
inline std::pair<NodeId, int> greedy_head(NodeId u, NodeId v, bool sat_u, bool sat_v, std::size_t b_u,
                                          std::size_t b_v, Identifier id_u, Identifier id_v,
                                          GreedyRule variant = GreedyRule::fewer_processed) {
  const NodeId lower = id_u < id_v ? u : v;
  if (sat_u || sat_v) {
    if (sat_u && sat_v) return {lower, 1};
    return {sat_u ? u : v, 1};
  }
  switch (variant) {
    case GreedyRule::first_endpoint:
      return {u, 2};
    case GreedyRule::more_processed:
      if (b_u != b_v) return {b_u > b_v ? u : v, 2};
      return {lower, 2};
    case GreedyRule::fewer_processed:
      break;
  }
  if (b_u != b_v) return {b_u < b_v ? u : v, 2};
  return {lower, 2};
}

/// Replayable state of the greedy algorithm.
class GreedyState {
 public:
  GreedyState(const Multigraph& g, std::uint64_t n_threshold_source, std::span<const Identifier> ids = {},
              GreedyRule variant = GreedyRule::fewer_processed)
      : g_(&g),
        threshold_(static_cast<std::size_t>(high_degree_threshold(n_threshold_source))),
        variant_(variant),
        o_(g.edge_count()),
        processed_(g.node_count(), 0),
        inward_(g.node_count(), 0),
        satisfied_(g.node_count(), 0),
        parent_(g.node_count()),
        size_(g.node_count(), 1) {
    if (ids.empty())
      ids_ = identity_ids(g.node_count());
    else
      ids_.assign(ids.begin(), ids.end());
    for (NodeId v = 0; v < g.node_count(); ++v) {
      parent_[v] = v;
      satisfied_[v] = g.degree(v) < threshold_;
    }
  }

  /// Orients e; returns the rule used.
  int process(EdgeId e) {
    if (o_.decided(e)) throw std::invalid_argument("edge processed twice: " + std::to_string(e));
    const auto [u, v] = g_->endpoints(e);
    const auto [head, rule] =
        greedy_head(u, v, satisfied_[u], satisfied_[v], processed_[u], processed_[v], ids_[u], ids_[v], variant_);
    const NodeId tail = head == u ? v : u;
    o_.head[e] = head;
    ++processed_[u];
    ++processed_[v];
    ++inward_[head];
    satisfied_[tail] = 1;
    if (rule == 2) unite(u, v);
    return rule;
  }

  bool satisfied(NodeId v) const { return satisfied_[v]; }
  std::size_t inward(NodeId v) const { return inward_[v]; }
  std::size_t processed(NodeId v) const { return processed_[v]; }
  std::size_t component_size(NodeId v) { return size_[find(v)]; }
  std::size_t threshold() const { return threshold_; }
  const Orientation& orientation() const { return o_; }

  /// The potential invariant at v: unsatisfied with b inward edges implies a
  /// rule-2 component of at least 2^b nodes.
  bool invariant_holds(NodeId v) {
    if (satisfied_[v]) return true;
    const auto b = inward_[v];
    return b < 63 && component_size(v) >= (std::size_t{1} << b);
  }

 private:
  NodeId find(NodeId v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  const Multigraph* g_;
  std::size_t threshold_;
  GreedyRule variant_;
  std::vector<Identifier> ids_;
  Orientation o_;
  std::vector<std::size_t> processed_, inward_;
  std::vector<char> satisfied_;
  std::vector<NodeId> parent_;
  std::vector<std::size_t> size_;
};

inline Orientation greedy_high_degree_so(const Multigraph& g, std::uint64_t n_threshold_source,
                                         const std::vector<EdgeId>& edge_order, std::span<const Identifier> ids = {},
                                         GreedyRule variant = GreedyRule::fewer_processed) {
  if (edge_order.size() != g.edge_count()) throw std::invalid_argument("edge order must list every edge once");
  GreedyState st(g, n_threshold_source, ids, variant);
  for (EdgeId e : edge_order) st.process(e);
  return st.orientation();
}

struct InvariantResult {
  bool pass = true;
  std::size_t failing_step = 0;
  NodeId failing_node = 0;
};

/// Replays the greedy run and checks the potential invariant after every
/// step. Only the head of the processed edge gains an inward edge, and
/// components only grow, so checking the head after each step is equivalent
/// to checking every node; `exhaustive` also sweeps all nodes each step.
inline InvariantResult greedy_invariant_check(const Multigraph& g, std::uint64_t n_threshold_source,
                                              const std::vector<EdgeId>& edge_order,
                                              std::span<const Identifier> ids = {},
                                              GreedyRule variant = GreedyRule::fewer_processed,
                                              bool exhaustive = false) {
  GreedyState st(g, n_threshold_source, ids, variant);
  for (std::size_t i = 0; i < edge_order.size(); ++i) {
    st.process(edge_order[i]);
    const NodeId head = st.orientation().head[edge_order[i]];
    if (!st.invariant_holds(head)) return {false, i, head};
    if (exhaustive)
      for (NodeId v = 0; v < g.node_count(); ++v)
        if (!st.invariant_holds(v)) return {false, i, v};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Clustering and the cluster graph

struct Clustering {
  std::vector<char> independent;  // I
  std::vector<NodeId> owner;      // cluster center of each node
  int T = 0;
};

/// BFS-verified clustering invariants; returns human-readable problems.
inline std::vector<std::string> check_clustering(const Multigraph& g, const Clustering& c) {
  std::vector<std::string> out;
  const int R = 2 * c.T + 1;
  const std::size_t n = g.node_count();
  if (c.owner.size() != n || c.independent.size() != n) return {"clustering size mismatch"};
  for (NodeId v = 0; v < n; ++v) {
    if (c.independent[v] && c.owner[v] != v) out.push_back("center " + std::to_string(v) + " not its own owner");
    if (!c.independent[c.owner[v]]) out.push_back("owner of " + std::to_string(v) + " is not independent");
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!c.independent[v]) continue;
    const auto d = bfs_distances(g, v, std::max(R, c.T));
    for (NodeId u = 0; u < n; ++u) {
      if (d[u] == kUnreached) continue;
      if (u != v && c.independent[u] && d[u] <= R)
        out.push_back("independent nodes " + std::to_string(v) + "," + std::to_string(u) + " at distance " +
                      std::to_string(d[u]));
      if (d[u] <= c.T && c.owner[u] != v)
        out.push_back("node " + std::to_string(u) + " within T of center " + std::to_string(v) + " owned elsewhere");
    }
  }
  for (NodeId u = 0; u < n; ++u) {
    const auto d = bfs_distances(g, u, R);
    if (d[c.owner[u]] == kUnreached) out.push_back("owner of " + std::to_string(u) + " farther than 2T+1");
  }
  return out;
}

struct ClusterGraph {
  Multigraph graph;                  // one node per cluster, ascending center
  std::vector<NodeId> center;        // cluster node -> center in the original graph
  std::vector<NodeId> cluster_of;    // original node -> cluster node
  std::vector<EdgeId> provenance;    // cluster edge -> original edge
  std::vector<EdgeId> cluster_edge;  // original edge -> cluster edge, or kNoHead for intra edges
};

inline ClusterGraph build_cluster_graph(const Multigraph& g, const std::vector<NodeId>& owner) {
  if (owner.size() != g.node_count()) throw std::invalid_argument("owner missing for some node");
  ClusterGraph cg;
  std::vector<NodeId> centers(owner.begin(), owner.end());
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  std::unordered_map<NodeId, NodeId> index;
  for (NodeId i = 0; i < centers.size(); ++i) index[centers[i]] = i;
  cg.center = centers;
  cg.cluster_of.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) cg.cluster_of[v] = index.at(owner[v]);
  EdgeList edges;
  cg.cluster_edge.assign(g.edge_count(), kNoHead);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [u, v] = g.endpoints(e);
    const NodeId cu = cg.cluster_of[u], cv = cg.cluster_of[v];
    if (cu == cv) continue;
    cg.cluster_edge[e] = static_cast<EdgeId>(edges.size());
    cg.provenance.push_back(e);
    edges.emplace_back(cu, cv);
  }
  cg.graph = Multigraph(centers.size(), std::move(edges));
  return cg;
}

// ---------------------------------------------------------------------------
// Low-degree cluster certificate

class LowDegreeLemmaViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct CycleWitness {
  std::vector<std::pair<EdgeId, NodeId>> edges;  // (edge, head), consistent direction
};
struct LowDegreeWitness {
  NodeId node;
};
using CycleOrLowDegree = std::variant<CycleWitness, LowDegreeWitness>;

/// A cycle if `sub` has one (first cycle of a DFS from the lowest-Identifier
/// node), else the lowest-Identifier node whose degree is at most 2. Degrees
/// come from `degree` when given (the degree in the surrounding graph).
inline CycleOrLowDegree find_cycle_or_low_degree(const Multigraph& sub, std::span<const Identifier> ids = {},
                                                 std::span<const std::size_t> degree = {}) {
  std::vector<Identifier> own;
  if (ids.empty()) {
    own = identity_ids(sub.node_count());
    ids = own;
  }
  std::vector<NodeId> by_id(sub.node_count());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(), [&](NodeId a, NodeId b) { return ids[a] < ids[b]; });
  std::vector<char> seen(sub.node_count(), 0);
  for (NodeId s : by_id) {
    if (seen[s]) continue;
    std::size_t nodes = 0, deg_sum = 0;
    std::vector<NodeId> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      ++nodes;
      deg_sum += sub.degree(x);
      for (const auto& inc : sub.incident(x))
        if (!seen[inc.other]) {
          seen[inc.other] = 1;
          stack.push_back(inc.other);
        }
    }
    if (deg_sum / 2 >= nodes) return CycleWitness{detail::first_dfs_cycle(sub, ids, s)};
  }
  for (NodeId v : by_id) {
    const std::size_t d = degree.empty() ? sub.degree(v) : degree[v];
    if (d <= 2) return LowDegreeWitness{v};
  }
  throw LowDegreeLemmaViolation("acyclic cluster whose nodes all have degree >= 3");
}

// ---------------------------------------------------------------------------
// Pipeline stages

struct PipelineParams {
  std::uint64_t n;
  int threshold;
  int T;
  int R;  // 2T + 1
};

inline PipelineParams pipeline_params(std::uint64_t n) {
  const int T = t_param(std::max<std::uint64_t>(n, 2));
  return {n, high_degree_threshold(std::max<std::uint64_t>(n, 1)), T, 2 * T + 1};
}

// Stage localities as functions of R = 2T + 1.
inline int mis_locality(int R) { return R; }
inline int assign_locality(int R) { return R; }
inline int clustering_locality(int R) { return mis_locality(R) + 2 * assign_locality(R); }
inline int inter_locality(int R) { return 6 * R + 2; }
inline int inter_composed_locality(int R) { return clustering_locality(R) + 2 * inter_locality(R); }
inline int intra_locality(int R) { return 2 * R + 1; }
/// 19R + 6 = 38T + 25.
inline int pipeline_locality(int R) { return inter_composed_locality(R) + 2 * intra_locality(R); }

inline int declared_pipeline_locality(std::uint64_t n) { return pipeline_locality(pipeline_params(n).R); }

inline constexpr std::uint64_t kIndependentMark = 1;

struct ClusterInfo {
  NodeId center;
  int dist;
};

/// Decisions of one cluster, made by its first processed member.
struct Batch {
  NodeId center;
  std::vector<std::pair<EdgeId, NodeId>> boundary;  // every boundary edge with its head, ascending EdgeId
  std::vector<EdgeId> decided_here;                 // edges decided by this batch, in decision order

  std::uint64_t digest() const {
    std::uint64_t h = fnv1a(&center, sizeof center);
    for (const auto& [e, hd] : boundary) {
      h = fnv1a(&e, sizeof e, h);
      h = fnv1a(&hd, sizeof hd, h);
    }
    for (EdgeId e : decided_here) h = fnv1a(&e, sizeof e, h);
    return h;
  }
  NodeId head_of(EdgeId e) const {
    auto it = std::lower_bound(boundary.begin(), boundary.end(), std::pair<EdgeId, NodeId>{e, 0});
    if (it == boundary.end() || it->first != e) return kNoHead;
    return it->second;
  }
};

/// Orientation of a cluster's intra edges.
struct ClusterPlan {
  NodeId center;
  bool high_degree;
  std::vector<std::pair<EdgeId, NodeId>> heads;  // ascending EdgeId

  std::uint64_t digest() const {
    std::uint64_t h = fnv1a(&center, sizeof center);
    for (const auto& [e, hd] : heads) {
      h = fnv1a(&e, sizeof e, h);
      h = fnv1a(&hd, sizeof hd, h);
    }
    return h;
  }
  NodeId head_of(EdgeId e) const {
    auto it = std::lower_bound(heads.begin(), heads.end(), std::pair<EdgeId, NodeId>{e, 0});
    if (it == heads.end() || it->first != e) return kNoHead;
    return it->second;
  }
};

class PipelineInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
inline int cluster_radius(std::size_t n, std::optional<int> T) { return T ? 2 * *T + 1 : pipeline_params(n).R; }
}  // namespace detail

/// Joins I iff no processed I-node lies within 2T+1. T defaults to t_param(n).
inline SlocalAlgorithm mis_stage(std::optional<int> T = {}) {
  return {"mis", [T](std::size_t n) { return mis_locality(detail::cluster_radius(n, T)); },
          [T](View& v) {
            const int R = detail::cluster_radius(v.n(), T);
            const bool join = !v.nearest_marked(kIndependentMark, R);
            Record r;
            r.marks = join ? kIndependentMark : 0;
            r.output = Blob::of(static_cast<std::uint8_t>(join));
            return r;
          }};
}

/// Owner = nearest I-node (from the finished independent set), ties to the
/// lower Identifier.
inline SlocalAlgorithm assign_stage(std::optional<int> T = {}) {
  return {"assign", [T](std::size_t n) { return assign_locality(detail::cluster_radius(n, T)); },
          [T](View& v) {
            const int R = detail::cluster_radius(v.n(), T);
            const auto hit = v.nearest_dep_marked(kIndependentMark, R);
            if (!hit) throw PipelineInvariantError("no independent node within 2T+1 of " + std::to_string(v.root()));
            Record r;
            r.key = hit->node;
            r.output = Blob::of(ClusterInfo{hit->node, hit->dist});
            return r;
          }};
}

inline SlocalAlgorithm clustering_algorithm(std::optional<int> T = {}) {
  auto alg = compose_slocal(mis_stage(T), assign_stage(T));
  alg.name = "clustering";
  return alg;
}

/// Clustering from a finished run of clustering_algorithm (or of any
/// pipeline layer holding ClusterInfo outputs).
inline Clustering clustering_from_records(const std::vector<std::optional<Record>>& recs, int T) {
  Clustering c;
  c.T = T;
  c.owner.resize(recs.size());
  c.independent.assign(recs.size(), 0);
  for (NodeId v = 0; v < recs.size(); ++v) {
    if (!recs[v]) throw PipelineInvariantError("cluster missing for node " + std::to_string(v));
    c.owner[v] = recs[v]->output.as<ClusterInfo>().center;
  }
  for (NodeId v = 0; v < recs.size(); ++v) c.independent[c.owner[v]] = 1;
  return c;
}

inline Clustering run_clustering(const World& world, const std::vector<NodeId>& sched, std::optional<int> T = {},
                                 ExecOptions opt = {}) {
  const auto run = run_slocal(world, sched, clustering_algorithm(T), nullptr, opt);
  std::vector<std::optional<Record>> recs(run.records.begin(), run.records.end());
  return clustering_from_records(recs, T ? *T : pipeline_params(std::max<std::size_t>(world.n(), 2)).T);
}

namespace detail {

struct ClusterScan {
  std::vector<NodeId> members;
  // (edge, member endpoint, outside endpoint), ascending edge
  std::vector<std::tuple<EdgeId, NodeId, NodeId>> boundary;
  std::vector<EdgeId> intra;
};

// Walks the cluster with the given center from `start` (a member), using
// `center_of` to read membership through the view.
template <class CenterOf>
ClusterScan scan_cluster(View& v, NodeId start, NodeId center, int walk_limit, CenterOf&& center_of) {
  ClusterScan s;
  s.members = v.explore(start, walk_limit, [&](NodeId u) { return center_of(u) == center; });
  for (NodeId x : s.members)
    for (const auto& inc : v.incident(x)) {
      if (center_of(inc.other) == center) {
        if (x < inc.other) s.intra.push_back(inc.edge);
      } else {
        s.boundary.emplace_back(inc.edge, x, inc.other);
      }
    }
  std::sort(s.boundary.begin(), s.boundary.end());
  std::sort(s.intra.begin(), s.intra.end());
  s.intra.erase(std::unique(s.intra.begin(), s.intra.end()), s.intra.end());
  return s;
}

}  // namespace detail

/// Inter-cluster edges. The first processed member of a cluster X decides all
/// of X's still-undecided boundary edges, in ascending EdgeId order, by the
/// greedy rules applied to cluster statuses. Statuses come from the batches
/// of X's neighbor clusters Y and of their neighbors Z, all within 6R+2.
/// Later members copy X's batch.
inline SlocalAlgorithm inter_stage() {
  return {"inter", [](std::size_t n) { return inter_locality(pipeline_params(n).R); },
          [](View& v) {
            const auto P = pipeline_params(v.n());
            const int R = P.R;
            const auto center_of = [&](NodeId u) { return v.dep(u).output.as<ClusterInfo>().center; };
            const NodeId c = center_of(v.root());
            Record rec;
            rec.key = c;
            if (const auto x = v.find_keyed(c, v.root(), 2 * R)) {
              rec.output = v.record(*x)->output;
              return rec;
            }
            const auto X = detail::scan_cluster(v, v.root(), c, 2 * R, center_of);

            // Known decisions on edges around X, from existing batches.
            std::unordered_map<EdgeId, NodeId> decided;
            std::unordered_map<NodeId, std::optional<NodeId>> batch_holder;  // center -> some holder
            const auto holder_of = [&](NodeId center, NodeId anchor) {
              auto it = batch_holder.find(center);
              if (it != batch_holder.end()) return it->second;
              auto h = v.find_keyed(center, anchor, 2 * R);
              batch_holder[center] = h;
              if (h)
                for (const auto& [e, hd] : v.record(*h)->output.as<Batch>().boundary) decided[e] = hd;
              return h;
            };

            struct Status {
              std::size_t degree = 0, processed = 0;
              bool satisfied = false;
              Identifier id = 0;
            };

            // Every neighbor cluster Y: its members, boundary, and the
            // batches of Y and of Y's neighbors.
            std::map<NodeId, detail::ClusterScan> neighbors;
            for (const auto& [e, a, b] : X.boundary) {
              const NodeId y = center_of(b);
              if (neighbors.count(y)) continue;
              neighbors.emplace(y, detail::scan_cluster(v, b, y, 2 * R, center_of));
            }
            for (const auto& [y, Y] : neighbors) {
              holder_of(y, Y.members.front());
              for (const auto& [e, a, b] : Y.boundary) holder_of(center_of(b), b);
            }

            // Cluster statuses from the decisions known so far.
            const auto make_status = [&](NodeId center, const detail::ClusterScan& s) {
              Status st;
              st.degree = s.boundary.size();
              st.satisfied = st.degree < static_cast<std::size_t>(P.threshold);
              for (const auto& [e, a, b] : s.boundary) {
                auto it = decided.find(e);
                if (it == decided.end()) continue;
                ++st.processed;
                if (it->second == b) st.satisfied = true;
              }
              st.id = v.id(center);
              return st;
            };
            // Centers are read through the member that reached them.
            Status sx = make_status(c, X);
            std::map<NodeId, Status> sy;
            for (const auto& [y, Y] : neighbors) sy[y] = make_status(y, Y);

            auto batch = std::make_shared<Batch>();
            batch->center = c;
            for (const auto& [e, a, b] : X.boundary) {
              auto it = decided.find(e);
              if (it != decided.end()) {
                batch->boundary.emplace_back(e, it->second);
                continue;
              }
              const NodeId y = center_of(b);
              auto& st_y = sy[y];
              const auto [head_cluster, rule] =
                  greedy_head(c, y, sx.satisfied, st_y.satisfied, sx.processed, st_y.processed, sx.id, st_y.id);
              (void)rule;
              const NodeId head = head_cluster == c ? a : b;
              ++sx.processed;
              ++st_y.processed;
              if (head_cluster == c)
                st_y.satisfied = true;
              else
                sx.satisfied = true;
              decided[e] = head;
              batch->boundary.emplace_back(e, head);
              batch->decided_here.push_back(e);
            }
            rec.output = Blob::of(Batch(*batch));
            return rec;
          }};
}

/// Intra-cluster edges. The first processed member of a cluster plans the
/// orientation of all its intra edges; later members copy the plan.
inline SlocalAlgorithm intra_stage() {
  return {"intra", [](std::size_t n) { return intra_locality(pipeline_params(n).R); },
          [](View& v) {
            const auto P = pipeline_params(v.n());
            const int R = P.R;
            const auto& mine = v.dep(v.root()).output.as<Batch>();
            const NodeId c = mine.center;
            Record rec;
            rec.key = c;
            if (const auto x = v.find_keyed(c, v.root(), 2 * R)) {
              rec.state = v.record(*x)->state;
            } else {
              const auto center_of = [&](NodeId u) { return v.dep(u).output.as<Batch>().center; };
              const auto X = detail::scan_cluster(v, v.root(), c, 2 * R, center_of);
              // Local copy of the cluster's induced subgraph.
              std::unordered_map<NodeId, NodeId> local;
              for (NodeId i = 0; i < X.members.size(); ++i) local[X.members[i]] = i;
              EdgeList le;
              const auto& g = v.engine().graph();
              for (EdgeId e : X.intra) {
                const auto [a, b] = g.endpoints(e);
                le.emplace_back(local.at(a), local.at(b));
              }
              const Multigraph sub(X.members.size(), le);
              std::vector<Identifier> ids(X.members.size());
              std::vector<std::size_t> deg(X.members.size());
              for (NodeId i = 0; i < X.members.size(); ++i) {
                ids[i] = v.id(X.members[i]);
                deg[i] = v.degree(X.members[i]);
              }
              Orientation so(sub.edge_count());
              std::vector<NodeId> comp(X.members.size());
              std::iota(comp.begin(), comp.end(), 0);
              std::vector<NodeId> targets;
              ClusterPlan plan{c, false, {}};
              // Outgoing boundary edge: its member endpoint with lowest Identifier.
              std::optional<NodeId> exit;
              for (const auto& [e, a, b] : X.boundary)
                if (mine.head_of(e) == b && (!exit || ids[local.at(a)] < ids[*exit])) exit = local.at(a);
              if (exit) {
                plan.high_degree = true;
                targets.push_back(*exit);
              } else {
                if (X.boundary.size() >= static_cast<std::size_t>(P.threshold))
                  throw PipelineInvariantError("high-degree cluster " + std::to_string(c) + " has no outgoing edge");
                const auto w = find_cycle_or_low_degree(sub, ids, deg);
                if (const auto* cyc = std::get_if<CycleWitness>(&w)) {
                  for (const auto& [e, hd] : cyc->edges) {
                    so.head[e] = hd;
                    targets.push_back(hd);
                  }
                } else {
                  targets.push_back(std::get<LowDegreeWitness>(w).node);
                }
              }
              // BFS tree toward the targets; with a single target this is a
              // spanning tree, leftover edges go to the lower Identifier.
              sinkless::detail::orient_toward(sub, comp, targets, ids, so);
              for (EdgeId i = 0; i < X.intra.size(); ++i) plan.heads.emplace_back(X.intra[i], X.members[so.head[i]]);
              rec.state = Blob::of(std::move(plan));
            }
            const auto& plan = rec.state.as<ClusterPlan>();
            std::vector<NodeId> heads;
            for (const auto& inc : v.incident(v.root())) {
              NodeId h = mine.head_of(inc.edge);
              if (h == kNoHead) h = plan.head_of(inc.edge);
              if (h == kNoHead) throw PipelineInvariantError("edge " + std::to_string(inc.edge) + " left undecided");
              heads.push_back(h);
            }
            rec.output = Blob::of(std::move(heads));
            return rec;
          }};
}

inline SlocalAlgorithm inter_composed_algorithm() { return compose_slocal(clustering_algorithm(), inter_stage()); }

/// The full single-stage algorithm: compose(compose(compose(MIS, assign),
/// inter), intra), locality 19R + 6 with R = 2T + 1.
inline SlocalAlgorithm sinkless_orientation_slocal() {
  auto alg = compose_slocal(inter_composed_algorithm(), intra_stage());
  alg.name = "slocal_so";
  return alg;
}

// Layers used by the composed pipeline run.
inline constexpr std::uint32_t kInterLayer = 2;
inline constexpr std::uint32_t kClusterLayer = 4;
inline constexpr std::uint32_t kMisLayer = 8;

// ---------------------------------------------------------------------------
// Running the pipeline

struct PipelineReport {
  std::uint64_t n = 0;
  int T = 0;
  int declared_locality = 0;
  int measured_max_radius = 0;
  std::size_t cluster_count = 0;
  int max_cluster_radius = 0;
  ViolationReport violations;
};

struct PipelineResult {
  Orientation orientation;
  PipelineReport report;
  SlocalRun run;
  Clustering clustering;
  std::vector<EdgeId> inter_order;  // inter-cluster edges in greedy decision order
};

/// Per-node heads (incidence order) to an edge-keyed orientation; both
/// endpoints must agree.
inline Orientation assemble_orientation(const Multigraph& g, const std::vector<Record>& records) {
  Orientation o(g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto& heads = records[v].output.as<std::vector<NodeId>>();
    const auto inc = g.incident(v);
    if (heads.size() != inc.size()) throw PipelineInvariantError("output size mismatch at node " + std::to_string(v));
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const EdgeId e = inc[i].edge;
      if (o.decided(e) && o.head[e] != heads[i])
        throw PipelineInvariantError("endpoints disagree on edge " + std::to_string(e));
      o.head[e] = heads[i];
    }
  }
  return o;
}

inline PipelineResult run_pipeline(const World& world, const std::vector<NodeId>& sched, ExecOptions opt = {}) {
  const auto& g = *world.graph;
  PipelineResult res;
  const auto P = pipeline_params(std::max<std::size_t>(g.node_count(), 2));
  res.run = run_slocal(world, sched, sinkless_orientation_slocal(), nullptr, opt, true);
  res.orientation = assemble_orientation(g, res.run.records);

  const auto& clust = res.run.inner.at(kClusterLayer);
  res.clustering = clustering_from_records(clust, P.T);
  int max_radius = 0;
  for (const auto& r : clust) max_radius = std::max(max_radius, r->output.as<ClusterInfo>().dist);
  // Batches in creation order: the first record published for each center.
  std::unordered_map<std::uint64_t, char> seen;
  for (NodeId v : res.run.orders.at(kInterLayer)) {
    const auto& rec = *res.run.inner.at(kInterLayer)[v];
    if (!seen.emplace(rec.key, 1).second) continue;
    const auto& b = rec.output.as<Batch>();
    res.inter_order.insert(res.inter_order.end(), b.decided_here.begin(), b.decided_here.end());
  }

  auto& rep = res.report;
  rep.n = g.node_count();
  rep.T = P.T;
  rep.declared_locality = res.run.declared_locality;
  rep.measured_max_radius = res.run.measured_radius;
  rep.cluster_count = std::count(res.clustering.independent.begin(), res.clustering.independent.end(), 1);
  rep.max_cluster_radius = max_radius;
  rep.violations = validate_sinkless(g, res.orientation);
  return res;
}

/// The same stages run one after another with finished dependencies, each
/// inner stage replayed in the order the composed run computed it.
inline std::vector<Blob> staged_pipeline_reference(const World& world, const std::vector<NodeId>& sched,
                                                   const SlocalRun& composed) {
  const auto order_of = [&](std::uint32_t l) {
    auto it = composed.orders.find(l);
    return complete_order(it == composed.orders.end() ? std::vector<NodeId>{} : it->second, sched);
  };
  auto mis = run_slocal(world, order_of(kMisLayer), mis_stage());
  auto assign = run_slocal(world, order_of(kClusterLayer), assign_stage(), &mis.records);
  auto inter = run_slocal(world, order_of(kInterLayer), inter_stage(), &assign.records);
  return run_slocal(world, sched, intra_stage(), &inter.records).outputs();
}

}  // namespace sinkless
