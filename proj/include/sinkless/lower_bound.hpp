#pragma once

// Round elimination for sinkless orientation on a fixed support graph:
// bipartite encoding, output sets, the eliminated algorithm, the zero-round
// adversary, certificate lifting and an exhaustive oracle. Algorithms are
// black boxes queried through InputView; enumeration is driven by the edges
// an algorithm actually asks about.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sinkless/edge_set.hpp"
#include "sinkless/graph.hpp"
#include "sinkless/models.hpp"
#include "sinkless/orientation.hpp"

namespace sinkless {

class LowerBoundError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two input edges of one passive node were explored by the output-set
/// enumerations of two different neighbors.
class EliminationPreconditionError : public LowerBoundError {
 public:
  EliminationPreconditionError(NodeId u, NodeId v, NodeId w, EdgeId e)
      : LowerBoundError("output-set enumerations of " + std::to_string(v) + " and " + std::to_string(w) +
                        " around " + std::to_string(u) + " share edge " + std::to_string(e)),
        passive(u),
        first(v),
        second(w),
        shared(e) {}
  NodeId passive, first, second;
  EdgeId shared;
};

// ---------------------------------------------------------------------------
// Support instance

struct SupportInstance {
  std::string name;
  Multigraph graph;
  TwoColoring coloring;
  std::vector<Identifier> ids;
  int girth = -1;
  std::size_t degree = 0;
  std::vector<std::vector<int>> dist;  // all pairs

  std::size_t n() const { return graph.node_count(); }
  std::size_t m() const { return graph.edge_count(); }
  int edge_distance(NodeId root, EdgeId e) const {
    const auto [a, b] = graph.endpoints(e);
    const int da = dist[root][a], db = dist[root][b];
    if (da == kUnreached) return db;
    if (db == kUnreached) return da;
    return std::min(da, db);
  }
  /// Edge visible from root at radius r iff an endpoint is within r.
  bool visible(NodeId root, int r, EdgeId e) const {
    if (r < 0) return false;
    const int d = edge_distance(root, e);
    return d != kUnreached && d <= r;
  }
  std::vector<EdgeId> visible_edges(NodeId root, int r) const {
    std::vector<EdgeId> out;
    for (EdgeId e = 0; e < m(); ++e)
      if (visible(root, r, e)) out.push_back(e);
    return out;
  }
  EdgeSet full_input() const { return EdgeSet(m(), true); }
};

inline SupportInstance make_support_instance(std::string name, const Multigraph& g, TwoColoring coloring,
                                             std::vector<Identifier> ids = {}) {
  if (!is_proper_two_coloring(g, coloring)) throw GraphError("support graph needs a proper 2-coloring");
  if (g.node_count() == 0 || !is_regular(g, g.degree(0))) throw GraphError("support graph must be regular");
  if (!g.is_simple()) throw GraphError("support graph must be simple");
  SupportInstance si;
  si.name = std::move(name);
  si.graph = g;
  si.coloring = std::move(coloring);
  si.ids = ids.empty() ? identity_ids(g.node_count()) : std::move(ids);
  if (si.ids.size() != g.node_count()) throw GraphError("identifier count does not match node count");
  si.girth = girth(g).value_or(-1);
  si.degree = g.degree(0);
  for (NodeId v = 0; v < g.node_count(); ++v) si.dist.push_back(bfs_distances(g, v));
  return si;
}

inline SupportInstance support_fixture(const std::string& name) {
  auto f = fixture(name);
  return make_support_instance(f.name, f.graph, f.coloring);
}


// ---------------------------------------------------------------------------
// Views and algorithms

/// Answers input-status queries; may throw NeedEdge during enumeration.
using InputOracle = std::function<bool(EdgeId)>;

struct NeedEdge {
  EdgeId edge;
  std::uint64_t token;
};

class InputView {
 public:
  InputView(const SupportInstance& si, NodeId root, int radius, const InputOracle& oracle)
      : si_(&si), root_(root), radius_(radius), oracle_(&oracle) {}

  const SupportInstance& instance() const { return *si_; }
  NodeId root() const { return root_; }
  int radius() const { return radius_; }
  // The support graph and identifiers are global knowledge.
  std::span<const Incidence> incident(NodeId u) const { return si_->graph.incident(u); }
  Identifier id(NodeId u) const { return si_->ids[u]; }
  Color color(NodeId u) const { return si_->coloring[u]; }

  bool is_input(EdgeId e) {
    if (!si_->visible(root_, radius_, e))
      throw LocalityViolation("edge " + std::to_string(e) + " is not visible from " + std::to_string(root_) +
                              " at radius " + std::to_string(radius_));
    return (*oracle_)(e);
  }
  std::size_t input_degree(NodeId u) {
    std::size_t d = 0;
    for (const auto& inc : incident(u)) d += is_input(inc.edge);
    return d;
  }

 private:
  const SupportInstance* si_;
  NodeId root_;
  int radius_;
  const InputOracle* oracle_;
};

/// Labels one label per incident edge of the root (incidence order); labels
/// on non-input edges are ignored.
struct BipartiteAlgorithm {
  std::string name;
  Color active = Color::black;
  int locality = 0;
  std::function<std::vector<Label>(InputView&)> decide;
};

inline std::vector<Label> run_decide(const SupportInstance& si, const BipartiteAlgorithm& alg, NodeId root,
                                     const InputOracle& oracle) {
  if (si.coloring[root] != alg.active) throw std::invalid_argument("decide called at a passive node");
  InputView view(si, root, alg.locality, oracle);
  auto labels = alg.decide(view);
  if (labels.size() != si.graph.degree(root))
    throw LowerBoundError(alg.name + " returned " + std::to_string(labels.size()) + " labels at node " +
                          std::to_string(root));
  return labels;
}

inline InputOracle oracle_of(const EdgeSet& input) {
  return [&input](EdgeId e) { return input.test(e); };
}

namespace detail {

// Decision trie of a deterministic decide: the same answers produce the same
// queries, so every run extends one path.
struct DecisionTrie {
  struct Node {
    EdgeId query = kNoHead;
    std::array<int, 2> child{-1, -1};
    int result = -1;
  };
  std::vector<std::vector<Node>> roots;
  std::vector<std::vector<Label>> results;
  std::size_t real_calls = 0;
};

}  // namespace detail

/// Same algorithm, with decide results cached per root in a decision trie.
/// The cache is tied to the first support instance it sees.
inline BipartiteAlgorithm memoized(BipartiteAlgorithm alg) {
  auto trie = std::make_shared<detail::DecisionTrie>();
  auto inner = alg.decide;
  alg.decide = [trie, inner](InputView& view) -> std::vector<Label> {
    auto& t = *trie;
    if (t.roots.size() < view.instance().n()) t.roots.resize(view.instance().n());
    auto& nodes = t.roots[view.root()];
    if (nodes.empty()) nodes.emplace_back();
    int cur = 0;
    while (true) {
      const auto& nd = nodes[cur];
      if (nd.result >= 0) return t.results[nd.result];
      if (nd.query == kNoHead) break;
      const int next = nd.child[view.is_input(nd.query)];
      if (next < 0) break;
      cur = next;
    }
    std::vector<std::pair<EdgeId, bool>> path;
    // Only first queries count: nested caches may repeat a prefix.
    const InputOracle record = [&](EdgeId e) {
      const bool b = view.is_input(e);
      if (std::none_of(path.begin(), path.end(), [e](const auto& q) { return q.first == e; }))
        path.emplace_back(e, b);
      return b;
    };
    InputView replay(view.instance(), view.root(), view.radius(), record);
    ++t.real_calls;
    auto labels = inner(replay);
    int at = 0;
    for (const auto& [e, b] : path) {
      if (nodes[at].query == kNoHead) nodes[at].query = e;
      if (nodes[at].query != e) throw LowerBoundError("decide is not deterministic at node " +
                                                      std::to_string(view.root()));
      if (nodes[at].child[b] < 0) {
        nodes[at].child[b] = static_cast<int>(nodes.size());
        nodes.emplace_back();
      }
      at = nodes[at].child[b];
    }
    if (nodes[at].result < 0) {
      nodes[at].result = static_cast<int>(t.results.size());
      t.results.push_back(labels);
    }
    return labels;
  };
  return alg;
}

// ---------------------------------------------------------------------------
// Query-driven enumeration

using Assignment = std::vector<std::pair<EdgeId, bool>>;

inline EdgeSet apply_assignment(EdgeSet base, const Assignment& a) {
  for (const auto& [e, b] : a) base.set(e, b);
  return base;
}

namespace detail {
inline std::uint64_t next_enumeration_token() {
  static std::atomic<std::uint64_t> token{0};
  return ++token;
}
inline thread_local std::uint64_t* enumeration_budget = nullptr;
}  // namespace detail

class EnumerationBudgetExceeded : public LowerBoundError {
 public:
  using LowerBoundError::LowerBoundError;
};

/// Caps the number of enumeration steps on this thread while alive.
class EnumerationBudget {
 public:
  explicit EnumerationBudget(std::uint64_t steps) : left_(steps), saved_(detail::enumeration_budget) {
    detail::enumeration_budget = &left_;
  }
  ~EnumerationBudget() { detail::enumeration_budget = saved_; }
  EnumerationBudget(const EnumerationBudget&) = delete;
  EnumerationBudget& operator=(const EnumerationBudget&) = delete;
  std::uint64_t left() const { return left_; }

 private:
  std::uint64_t left_;
  std::uint64_t* saved_;
};

/// Runs `body(oracle, assignment)` under every assignment of the free edges
/// that its queries reach; non-free edges go to `outer`. `body` returns false
/// to stop. Returns the free edges that were queried.
inline EdgeSet enumerate_inputs(std::size_t m, const std::function<bool(EdgeId)>& free, const InputOracle& outer,
                                const std::function<bool(const InputOracle&, const Assignment&)>& body) {
  const auto token = detail::next_enumeration_token();
  EdgeSet explored(m);
  std::vector<Assignment> stack{{}};
  while (!stack.empty()) {
    Assignment a = std::move(stack.back());
    stack.pop_back();
    if (auto* b = detail::enumeration_budget) {
      if (*b == 0) throw EnumerationBudgetExceeded("enumeration budget exhausted");
      --*b;
    }
    const InputOracle oracle = [&](EdgeId e) {
      if (!free(e)) return outer(e);
      for (const auto& [x, b] : a)
        if (x == e) return b;
      throw NeedEdge{e, token};
    };
    try {
      if (!body(oracle, a)) break;
    } catch (const NeedEdge& need) {
      if (need.token != token) throw;
      explored.set(need.edge);
      Assignment one = a;
      one.emplace_back(need.edge, true);
      a.emplace_back(need.edge, false);
      stack.push_back(std::move(one));
      stack.push_back(std::move(a));
    }
  }
  return explored;
}

inline std::uint8_t label_bit(Label l) { return l == Label::O ? 1 : 2; }

struct OutputSet {
  std::uint8_t bits = 0;  // 1: O, 2: I
  EdgeSet explored;       // free edges the enumeration queried
  std::size_t leaves = 0;

  bool has(Label l) const { return bits & label_bit(l); }
  bool only(Label l) const { return bits == label_bit(l); }
  std::string str() const {
    std::string s = "{";
    if (has(Label::O)) s += "O";
    if (has(Label::I)) s += s.size() > 1 ? ",I" : "I";
    return s + "}";
  }
};

/// Edges visible to active v at radius T but not to passive u at radius T-1.
inline bool free_for(const SupportInstance& si, int T, NodeId u, NodeId v, EdgeId e) {
  return si.visible(v, T, e) && !si.visible(u, T - 1, e);
}

/// Enumerates alg's label on edge e_uv = {u, v} at the active endpoint v over
/// all inputs compatible with `known` (u's radius T-1 view); calls
/// `leaf(label, assignment)` per leaf until it returns false.
inline EdgeSet enumerate_outputs(const SupportInstance& si, const BipartiteAlgorithm& alg, EdgeId e_uv, NodeId u,
                                 const InputOracle& known,
                                 const std::function<bool(Label, const Assignment&)>& leaf) {
  if (alg.locality < 1) throw std::invalid_argument("output sets need locality at least 1");
  const NodeId v = si.graph.other(e_uv, u);
  if (si.coloring[v] != alg.active) throw std::invalid_argument("output sets are taken at the active endpoint");
  std::size_t idx = 0;
  const auto inc = si.graph.incident(v);
  while (inc[idx].edge != e_uv) ++idx;
  const int T = alg.locality;
  return enumerate_inputs(
      si.m(), [&](EdgeId e) { return free_for(si, T, u, v, e); }, known,
      [&](const InputOracle& oracle, const Assignment& a) { return leaf(run_decide(si, alg, v, oracle)[idx], a); });
}

inline OutputSet possible_outputs(const SupportInstance& si, const BipartiteAlgorithm& alg, EdgeId e_uv, NodeId u,
                                  const InputOracle& known) {
  OutputSet s;
  s.explored = enumerate_outputs(si, alg, e_uv, u, known, [&](Label l, const Assignment&) {
    s.bits |= label_bit(l);
    ++s.leaves;
    return true;
  });
  return s;
}

// ---------------------------------------------------------------------------
// Round elimination

/// Checked against the structural bound; the edge-level disjointness is
/// checked on every evaluation of the eliminated algorithm.
inline void require_elimination_precondition(const SupportInstance& si, int T) {
  if (T < 1) throw LowerBoundError("round elimination needs locality at least 1");
  if (si.girth != -1 && 2 * T >= si.girth)
    throw LowerBoundError("locality " + std::to_string(T) + " is not below half the girth " +
                          std::to_string(si.girth));
}

/// Structural form of the disjointness: for every passive u and active
/// neighbors v != w, the free sets of v and w are disjoint. Returns a witness
/// (u, v, w, e) when they are not.
inline std::optional<std::tuple<NodeId, NodeId, NodeId, EdgeId>> structural_overlap(const SupportInstance& si, int T,
                                                                                    Color active) {
  for (NodeId u = 0; u < si.n(); ++u) {
    if (si.coloring[u] == active) continue;
    const auto inc = si.graph.incident(u);
    for (std::size_t i = 0; i < inc.size(); ++i)
      for (std::size_t j = i + 1; j < inc.size(); ++j)
        for (EdgeId e = 0; e < si.m(); ++e)
          if (free_for(si, T, u, inc[i].other, e) && free_for(si, T, u, inc[j].other, e))
            return std::tuple{u, inc[i].other, inc[j].other, e};
  }
  return std::nullopt;
}

/// The locality T-1 algorithm with the opposite active color: on an incident
/// input edge {u, v}, O iff S(u, v) = {I}.
inline BipartiteAlgorithm eliminate_round(const SupportInstance& si, const BipartiteAlgorithm& alg_T) {
  require_elimination_precondition(si, alg_T.locality);
  BipartiteAlgorithm out;
  out.name = "elim(" + alg_T.name + ")";
  out.active = opposite(alg_T.active);
  out.locality = alg_T.locality - 1;
  out.decide = [&si, alg = alg_T](InputView& view) {
    const NodeId u = view.root();
    const InputOracle known = [&view](EdgeId e) { return view.is_input(e); };
    const auto inc = view.incident(u);
    std::vector<Label> labels(inc.size(), Label::I);
    std::vector<std::pair<NodeId, EdgeSet>> seen;
    for (std::size_t i = 0; i < inc.size(); ++i) {
      if (!view.is_input(inc[i].edge)) continue;
      auto s = possible_outputs(si, alg, inc[i].edge, u, known);
      labels[i] = s.only(Label::I) ? Label::O : Label::I;
      for (const auto& [w, ex] : seen)
        if (ex.intersects(s.explored))
          throw EliminationPreconditionError(u, w, inc[i].other, (ex & s.explored).indices().front());
      seen.emplace_back(inc[i].other, std::move(s.explored));
    }
    return labels;
  };
  return memoized(std::move(out));
}

// ---------------------------------------------------------------------------
// Certificates

struct Counterexample {
  EdgeSet input;
  NodeId node = 0;
  ViolationKind kind = ViolationKind::active_sink;
  friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

inline EdgeLabeling labeling_of(const SupportInstance& si, const BipartiteAlgorithm& alg, const EdgeSet& input) {
  EdgeLabeling lab(si.m());
  const auto oracle = oracle_of(input);
  for (NodeId a = 0; a < si.n(); ++a) {
    if (si.coloring[a] != alg.active) continue;
    const auto labels = run_decide(si, alg, a, oracle);
    const auto inc = si.graph.incident(a);
    for (std::size_t i = 0; i < inc.size(); ++i)
      if (input.test(inc[i].edge)) lab.label[inc[i].edge] = labels[i];
  }
  return lab;
}

inline ViolationReport replay(const SupportInstance& si, const BipartiteAlgorithm& alg, const EdgeSet& input) {
  return validate_bipartite(si.graph, si.coloring, input, alg.active, labeling_of(si, alg, input));
}

/// Replays alg on the certificate input and looks for the claimed violation.
inline bool verify_counterexample(const SupportInstance& si, const BipartiteAlgorithm& alg, const Counterexample& c) {
  if (c.input.size() != si.m() || c.node >= si.n()) return false;
  const auto rep = replay(si, alg, c.input);
  return std::any_of(rep.begin(), rep.end(), [&](const Violation& v) { return v.node == c.node && v.kind == c.kind; });
}

inline Counterexample checked(const SupportInstance& si, const BipartiteAlgorithm& alg, Counterexample c,
                              const std::string& what) {
  if (!verify_counterexample(si, alg, c))
    throw LowerBoundError(what + ": certificate for " + alg.name + " does not verify");
  return c;
}

// ---------------------------------------------------------------------------
// Zero rounds

struct ZeroRoundResult {
  Counterexample cex;
  char branch = '?';
  std::size_t queries = 0;
  std::vector<std::uint8_t> label_sets;  // per edge, bits as in OutputSet
};

/// Labels each edge by all outputs its active endpoint can give on it, then
/// builds an active sink (some active node has three edges labeled {I}) or a
/// passive sink (some passive node has three edges that can carry O).
inline ZeroRoundResult refute_zero_round(const SupportInstance& si, const BipartiteAlgorithm& alg0,
                                         std::size_t query_budget = 0) {
  if (alg0.locality != 0) throw std::invalid_argument("refute_zero_round needs a locality-0 algorithm");
  if (si.degree != 5) throw std::invalid_argument("refute_zero_round needs a 5-regular support graph");
  const auto& g = si.graph;
  ZeroRoundResult res;
  res.label_sets.assign(si.m(), 0);
  std::vector<std::vector<std::vector<Label>>> outputs(si.n());  // active node -> mask -> labels
  for (NodeId a = 0; a < si.n(); ++a) {
    if (si.coloring[a] != alg0.active) continue;
    const auto inc = g.incident(a);
    outputs[a].resize(std::size_t{1} << inc.size());
    for (std::uint32_t mask = 0; mask < outputs[a].size(); ++mask) {
      const InputOracle oracle = [&](EdgeId e) {
        for (std::size_t i = 0; i < inc.size(); ++i)
          if (inc[i].edge == e) return ((mask >> i) & 1u) != 0;
        return false;
      };
      ++res.queries;
      if (query_budget && res.queries > query_budget) throw LowerBoundError("query budget exceeded");
      outputs[a][mask] = run_decide(si, alg0, a, oracle);
      for (std::size_t i = 0; i < inc.size(); ++i)
        if ((mask >> i) & 1u) res.label_sets[inc[i].edge] |= label_bit(outputs[a][mask][i]);
    }
  }
  const auto only_i = [&](EdgeId e) { return res.label_sets[e] == label_bit(Label::I); };

  for (NodeId a = 0; a < si.n(); ++a) {
    if (si.coloring[a] != alg0.active) continue;
    std::vector<EdgeId> pick;
    for (const auto& inc : g.incident(a))
      if (only_i(inc.edge) && pick.size() < 3) pick.push_back(inc.edge);
    if (pick.size() == 3) {
      res.branch = 'A';
      res.cex = checked(si, alg0, {EdgeSet::from_indices(si.m(), pick), a, ViolationKind::active_sink}, "branch A");
      return res;
    }
  }
  for (NodeId p = 0; p < si.n(); ++p) {
    if (si.coloring[p] == alg0.active) continue;
    std::vector<Incidence> pick;
    for (const auto& inc : g.incident(p))
      if (!only_i(inc.edge) && pick.size() < 3) pick.push_back(inc);
    if (pick.size() < 3) continue;
    EdgeSet h(si.m());
    for (const auto& [e, v] : pick) {
      const auto inc = g.incident(v);
      std::size_t idx = 0;
      while (inc[idx].edge != e) ++idx;
      std::optional<std::uint32_t> chosen;
      for (std::uint32_t mask = 0; mask < outputs[v].size() && !chosen; ++mask)
        if (((mask >> idx) & 1u) && outputs[v][mask][idx] == Label::O) chosen = mask;
      if (!chosen) throw LowerBoundError("edge label set claims O without a realizing input");
      for (std::size_t i = 0; i < inc.size(); ++i)
        if ((*chosen >> i) & 1u) h.set(inc[i].edge);
    }
    res.branch = 'B';
    res.cex = checked(si, alg0, {h, p, ViolationKind::passive_sink}, "branch B");
    return res;
  }
  throw LowerBoundError("zero-round adversary found neither branch for " + alg0.name);
}

// ---------------------------------------------------------------------------
// Lifting and the full refuter

/// Turns a certificate for eliminate_round(alg_T) into one for alg_T.
inline Counterexample lift_counterexample(const SupportInstance& si, const BipartiteAlgorithm& alg_T,
                                          const BipartiteAlgorithm& eliminated, const Counterexample& cex) {
  if (!verify_counterexample(si, eliminated, cex))
    throw LowerBoundError("certificate to lift does not verify against " + eliminated.name);
  if (cex.kind == ViolationKind::passive_sink) {
    // Every neighbor's set was {I}, so the same input already sinks v.
    return checked(si, alg_T, {cex.input, cex.node, ViolationKind::active_sink}, "lift (passive sink)");
  }
  if (cex.kind != ViolationKind::active_sink) throw LowerBoundError("cannot lift a " + std::string(to_string(cex.kind)));
  const NodeId u = cex.node;
  const auto known = oracle_of(cex.input);
  std::vector<std::vector<Assignment>> options;
  for (const auto& inc : si.graph.incident(u)) {
    if (!cex.input.test(inc.edge)) continue;
    std::vector<Assignment> realizing;
    enumerate_outputs(si, alg_T, inc.edge, u, known, [&](Label l, const Assignment& a) {
      if (l == Label::O) realizing.push_back(a);
      return realizing.size() < 4096;
    });
    if (realizing.empty()) throw LowerBoundError("no input realizes O on edge " + std::to_string(inc.edge));
    options.push_back(std::move(realizing));
  }
  // Pick one extension per neighbor, consistent on shared edges.
  std::map<EdgeId, bool> fixed;
  std::vector<std::size_t> choice(options.size(), 0);
  const std::function<bool(std::size_t)> pick = [&](std::size_t k) {
    if (k == options.size()) return true;
    for (std::size_t c = 0; c < options[k].size(); ++c) {
      std::vector<EdgeId> added;
      bool ok = true;
      for (const auto& [e, b] : options[k][c]) {
        auto it = fixed.find(e);
        if (it == fixed.end()) {
          fixed.emplace(e, b);
          added.push_back(e);
        } else if (it->second != b) {
          ok = false;
          break;
        }
      }
      if (ok && pick(k + 1)) return true;
      for (EdgeId e : added) fixed.erase(e);
    }
    return false;
  };
  if (!pick(0)) throw LowerBoundError("O-realizing extensions around " + std::to_string(u) + " conflict");
  EdgeSet h = cex.input;
  for (const auto& [e, b] : fixed) h.set(e, b);
  return checked(si, alg_T, {h, u, ViolationKind::passive_sink}, "lift (active sink)");
}

struct Refutation {
  Counterexample cex;
  std::vector<Counterexample> chain;  // certificates from locality 0 upward
  std::vector<std::string> algorithms;
  char zero_round_branch = '?';
  std::size_t zero_round_queries = 0;
};

inline Refutation refute(const SupportInstance& si, const BipartiteAlgorithm& alg) {
  if (alg.locality > 0) require_elimination_precondition(si, alg.locality);
  std::vector<BipartiteAlgorithm> level{memoized(alg)};
  while (level.back().locality > 0) level.push_back(eliminate_round(si, level.back()));
  Refutation r;
  for (const auto& a : level) r.algorithms.push_back(a.name);
  const auto z = refute_zero_round(si, level.back());
  r.zero_round_branch = z.branch;
  r.zero_round_queries = z.queries;
  Counterexample c = z.cex;
  r.chain.push_back(c);
  for (std::size_t k = level.size() - 1; k > 0; --k) {
    c = lift_counterexample(si, level[k - 1], level[k], c);
    r.chain.push_back(c);
  }
  r.cex = checked(si, alg, c, "refute");
  return r;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

/// Calls `cb(node, kind, assignment)` for every violating leaf of the
/// per-node decision trees; unassigned edges are free (any value violates).
/// Together the leaves cover every violating input of the 2^m.
inline void for_each_violation(const SupportInstance& si, const BipartiteAlgorithm& alg,
                               const std::function<bool(NodeId, ViolationKind, const Assignment&)>& cb) {
  const auto& g = si.graph;
  const InputOracle none = [](EdgeId e) -> bool {
    throw LowerBoundError("edge " + std::to_string(e) + " escaped enumeration");
  };
  bool go = true;
  for (NodeId x = 0; x < si.n() && go; ++x) {
    const bool active = si.coloring[x] == alg.active;
    enumerate_inputs(
        si.m(), [](EdgeId) { return true; }, none,
        [&](const InputOracle& oracle, const Assignment& a) {
          const auto inc = g.incident(x);
          std::vector<std::size_t> in;
          for (std::size_t i = 0; i < inc.size(); ++i)
            if (oracle(inc[i].edge)) in.push_back(i);
          if (in.size() < 3) return true;
          if (active) {
            const auto labels = run_decide(si, alg, x, oracle);
            for (auto i : in)
              if (labels[i] == Label::O) return true;
            go = cb(x, ViolationKind::active_sink, a);
            return go;
          }
          for (auto i : in) {
            const NodeId v = inc[i].other;
            const auto vinc = g.incident(v);
            std::size_t idx = 0;
            while (vinc[idx].edge != inc[i].edge) ++idx;
            if (run_decide(si, alg, v, oracle)[idx] == Label::I) return true;
          }
          go = cb(x, ViolationKind::passive_sink, a);
          return go;
        });
  }
}

inline constexpr std::size_t kExhaustiveEdgeCap = 30;

/// First violating input in the order of the 2^m enumeration (mask with bit
/// e for edge e), or none.
inline std::optional<Counterexample> exhaustive_check(const SupportInstance& si, const BipartiteAlgorithm& alg,
                                                      std::size_t cap = kExhaustiveEdgeCap) {
  if (si.m() > cap || si.m() > 63)
    throw std::invalid_argument("exhaustive check over " + std::to_string(si.m()) + " edges exceeds the cap");
  const auto memo = memoized(alg);
  std::optional<std::uint64_t> best;
  for_each_violation(si, memo, [&](NodeId, ViolationKind, const Assignment& a) {
    std::uint64_t mask = 0;
    for (const auto& [e, b] : a)
      if (b) mask |= std::uint64_t{1} << e;
    if (!best || mask < *best) best = mask;
    return true;
  });
  if (!best) return std::nullopt;
  EdgeSet input(si.m());
  for (EdgeId e = 0; e < si.m(); ++e)
    if ((*best >> e) & 1u) input.set(e);
  const auto rep = replay(si, memo, input);
  for (const auto& v : rep)
    if (v.kind == ViolationKind::active_sink || v.kind == ViolationKind::passive_sink)
      return Counterexample{input, v.node, v.kind};
  throw LowerBoundError("exhaustive leaf does not replay as a violation");
}

// ---------------------------------------------------------------------------
// Candidate algorithms

inline std::size_t edge_index(const SupportInstance& si, NodeId v, EdgeId e) {
  const auto inc = si.graph.incident(v);
  for (std::size_t i = 0; i < inc.size(); ++i)
    if (inc[i].edge == e) return i;
  throw std::invalid_argument("edge not incident");
}

inline BipartiteAlgorithm constant_algorithm(Label l, int T = 0, Color active = Color::black) {
  return {l == Label::O ? "constant_O" : "constant_I", active, T,
          [l](InputView& v) { return std::vector<Label>(v.incident(v.root()).size(), l); }};
}

/// O on every edge iff the input-degree is even.
inline BipartiteAlgorithm parity_algorithm(int T = 0, Color active = Color::black) {
  return {"parity", active, T, [](InputView& v) {
            const auto d = v.input_degree(v.root());
            return std::vector<Label>(v.incident(v.root()).size(), d % 2 == 0 ? Label::O : Label::I);
          }};
}

/// O on the lowest-EdgeId input edge, I elsewhere.
inline BipartiteAlgorithm lowest_edge_algorithm(int T = 0, Color active = Color::black) {
  return {"lowest_edge", active, T, [](InputView& v) {
            const auto inc = v.incident(v.root());
            std::vector<Label> out(inc.size(), Label::I);
            std::optional<std::size_t> best;
            for (std::size_t i = 0; i < inc.size(); ++i)
              if (v.is_input(inc[i].edge) && (!best || inc[i].edge < inc[*best].edge)) best = i;
            if (best) out[*best] = Label::O;
            return out;
          }};
}

/// O toward neighbors with a higher Identifier.
inline BipartiteAlgorithm id_compare_algorithm(int T = 0, Color active = Color::black) {
  return {"id_compare", active, T, [](InputView& v) {
            const auto inc = v.incident(v.root());
            std::vector<Label> out;
            for (const auto& i : inc) out.push_back(v.id(i.other) > v.id(v.root()) ? Label::O : Label::I);
            return out;
          }};
}

inline std::vector<BipartiteAlgorithm> strawmen(int T = 0, Color active = Color::black) {
  return {constant_algorithm(Label::O, T, active), constant_algorithm(Label::I, T, active),
          parity_algorithm(T, active), lowest_edge_algorithm(T, active), id_compare_algorithm(T, active)};
}

inline BipartiteAlgorithm strawman(const std::string& name, int T = 0, Color active = Color::black) {
  for (auto& a : strawmen(T, active))
    if (a.name == name) return a;
  throw std::invalid_argument("unknown strawman: " + name);
}

namespace detail {
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
inline std::uint32_t incident_mask(InputView& v, NodeId u) {
  std::uint32_t mask = 0;
  const auto inc = v.incident(u);
  for (std::size_t i = 0; i < inc.size(); ++i)
    if (v.is_input(inc[i].edge)) mask |= 1u << i;
  return mask;
}
inline std::vector<Label> labels_from_bits(std::uint64_t bits, std::size_t k) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back((bits >> i) & 1u ? Label::I : Label::O);
  return out;
}
}  // namespace detail

/// A seeded lookup table from incident input edges to labels.
inline BipartiteAlgorithm random_zero_round_algorithm(std::uint64_t seed, Color active = Color::black) {
  return {"random0#" + std::to_string(seed), active, 0, [seed](InputView& v) {
            const auto mask = detail::incident_mask(v, v.root());
            const auto h = detail::mix(seed ^ detail::mix(v.id(v.root()) * 64 + mask));
            return detail::labels_from_bits(h, v.incident(v.root()).size());
          }};
}

/// Seeded locality-1 algorithms. Labels hash the incident input edges and the
/// neighbors' Identifiers; with `read_neighbors` also the input-degree of the
/// lowest-Identifier neighbor.
inline BipartiteAlgorithm random_radius_one_algorithm(std::uint64_t seed, bool read_neighbors = false,
                                                      Color active = Color::black) {
  return {(read_neighbors ? "random1n#" : "random1#") + std::to_string(seed), active, 1,
          [seed, read_neighbors](InputView& v) {
            const auto inc = v.incident(v.root());
            std::uint64_t h = detail::mix(seed ^ detail::incident_mask(v, v.root()));
            NodeId low = inc.front().other;
            for (const auto& i : inc) {
              h = detail::mix(h ^ v.id(i.other));
              if (v.id(i.other) < v.id(low)) low = i.other;
            }
            if (read_neighbors) h = detail::mix(h + v.input_degree(low));
            return detail::labels_from_bits(h, inc.size());
          }};
}

/// Bipartite encoding of an orientation algorithm: per incident edge, I iff
/// it points to the active root.
inline BipartiteAlgorithm encode_bipartite(std::string name, int T, Color active,
                                           std::function<std::vector<NodeId>(InputView&)> orient) {
  return {std::move(name), active, T, [orient = std::move(orient)](InputView& v) {
            const auto heads = orient(v);
            const auto inc = v.incident(v.root());
            if (heads.size() != inc.size()) throw LowerBoundError("orientation output has the wrong size");
            std::vector<Label> out;
            for (std::size_t i = 0; i < inc.size(); ++i) {
              if (heads[i] != v.root() && heads[i] != inc[i].other)
                throw LowerBoundError("orientation output is not an endpoint");
              out.push_back(heads[i] == v.root() ? Label::I : Label::O);
            }
            return out;
          }};
}

/// Full-information algorithm: reads the whole input and replays
/// global_orientation on it. Needs radius at least the diameter.
inline BipartiteAlgorithm global_information_algorithm(const SupportInstance& si, Color active = Color::black) {
  int diameter = 0;
  for (const auto& row : si.dist)
    for (int d : row) diameter = std::max(diameter, d);
  return encode_bipartite("global", diameter, active, [](InputView& v) {
    const auto& si = v.instance();
    EdgeList el;
    std::vector<EdgeId> orig;
    for (EdgeId e = 0; e < si.m(); ++e)
      if (v.is_input(e)) {
        el.push_back(si.graph.endpoints(e));
        orig.push_back(e);
      }
    const Multigraph h(si.n(), el);
    const auto o = global_orientation(h, si.ids);
    std::vector<NodeId> heads;
    for (const auto& inc : v.incident(v.root())) {
      auto it = std::find(orig.begin(), orig.end(), inc.edge);
      heads.push_back(it == orig.end() ? v.root() : o.head[static_cast<EdgeId>(it - orig.begin())]);
    }
    return heads;
  });
}

// ---------------------------------------------------------------------------
// Lookup tables

/// Candidate algorithm as a table. Locality 0 keys are incident input-edge
/// bitmasks (bit i for the i-th incident edge); locality 1 keys are digests of
/// the radius-1 input view. Missing rows label every edge I.
struct LookupTable {
  int locality = 0;
  Color active = Color::black;
  std::map<std::pair<NodeId, std::uint64_t>, std::string> rows;
};

/// Digest of (EdgeId, input bit) over every edge visible at radius 1.
inline std::uint64_t radius_one_digest(InputView& v) {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (EdgeId e : v.instance().visible_edges(v.root(), 1)) {
    const std::uint64_t word = (std::uint64_t{e} << 1) | (v.is_input(e) ? 1u : 0u);
    h = fnv1a(&word, sizeof word, h);
  }
  return h;
}

inline BipartiteAlgorithm table_algorithm(LookupTable table) {
  if (table.locality != 0 && table.locality != 1) throw std::invalid_argument("lookup tables have locality 0 or 1");
  const int T = table.locality;
  const Color active = table.active;
  return {"table", active, T, [t = std::move(table)](InputView& v) {
            const std::uint64_t key = t.locality == 0 ? detail::incident_mask(v, v.root()) : radius_one_digest(v);
            const auto k = v.incident(v.root()).size();
            auto it = t.rows.find({v.root(), key});
            if (it == t.rows.end()) return std::vector<Label>(k, Label::I);
            if (it->second.size() != k) throw LowerBoundError("table row has the wrong number of labels");
            std::vector<Label> out;
            for (char c : it->second) {
              if (c != 'O' && c != 'I') throw LowerBoundError("table labels must be O or I");
              out.push_back(c == 'O' ? Label::O : Label::I);
            }
            return out;
          }};
}

// Format: "locality <0|1> active <black|white>" then rows
// "<active node>; <key>; <labels>", key as decimal bitmask (locality 0) or
// hexadecimal digest (locality 1). '#' starts a comment line.
inline LookupTable parse_lookup_table(std::istream& in) {
  LookupTable t;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("lookup table line " + std::to_string(lineno) + ": " + why);
  };
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      std::istringstream hs(line);
      std::string kw1, kw2, color;
      if (!(hs >> kw1 >> t.locality >> kw2 >> color) || kw1 != "locality" || kw2 != "active")
        fail("expected 'locality <T> active <color>'");
      if (color != "black" && color != "white") fail("active color must be black or white");
      if (t.locality != 0 && t.locality != 1) fail("locality must be 0 or 1");
      t.active = color == "black" ? Color::black : Color::white;
      header = true;
      continue;
    }
    const auto p1 = line.find(';');
    const auto p2 = p1 == std::string::npos ? p1 : line.find(';', p1 + 1);
    if (p2 == std::string::npos) fail("expected 'node; key; labels'");
    NodeId node = 0;
    std::uint64_t key = 0;
    try {
      node = static_cast<NodeId>(std::stoul(trim(line.substr(0, p1))));
      key = std::stoull(trim(line.substr(p1 + 1, p2 - p1 - 1)), nullptr, t.locality == 0 ? 10 : 16);
    } catch (const std::logic_error&) {
      fail("malformed node or key");
    }
    const auto labels = trim(line.substr(p2 + 1));
    if (labels.empty() || labels.find_first_not_of("OI") != std::string::npos) fail("labels must be O or I");
    if (!t.rows.emplace(std::pair{node, key}, labels).second) fail("duplicate row");
  }
  if (!header) throw std::invalid_argument("lookup table is empty");
  return t;
}

inline void write_lookup_table(std::ostream& os, const LookupTable& t) {
  os << "locality " << t.locality << " active " << to_string(t.active) << "\n";
  for (const auto& [k, labels] : t.rows) {
    os << k.first << "; ";
    if (t.locality == 0)
      os << k.second;
    else
      os << std::hex << k.second << std::dec;
    os << "; " << labels << "\n";
  }
}

/// Tabulates a locality-0 algorithm over every incident subset.
inline LookupTable tabulate_zero_round(const SupportInstance& si, const BipartiteAlgorithm& alg) {
  if (alg.locality != 0) throw std::invalid_argument("only locality-0 algorithms tabulate by bitmask");
  LookupTable t;
  t.active = alg.active;
  for (NodeId a = 0; a < si.n(); ++a) {
    if (si.coloring[a] != alg.active) continue;
    const auto inc = si.graph.incident(a);
    for (std::uint32_t mask = 0; mask < (1u << inc.size()); ++mask) {
      const InputOracle oracle = [&](EdgeId e) { return ((mask >> edge_index(si, a, e)) & 1u) != 0; };
      std::string s;
      for (Label l : run_decide(si, alg, a, oracle)) s += to_char(l);
      t.rows[{a, mask}] = s;
    }
  }
  return t;
}

}  // namespace sinkless
