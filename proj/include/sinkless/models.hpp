#pragma once

// Execution engines for LOCAL and SLOCAL algorithms.
//
// Views are lazy. An algorithm starts at the root and can only reach nodes by
// walking incidence lists, or through the engine's lookup primitives. Every
// read is charged with the length of the walk that reached the node, which is
// an upper bound on its distance from the root. A view rejects reads beyond
// its radius, and the outermost view tracks the physical radius used.
//
// Node records live in layers. The top-level algorithm writes layer 1; an
// algorithm that depends on another one reads layer 2L from a view on layer L.
// compose_slocal fills the dependency layer on demand.

#include <algorithm>
#include <cstring>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <typeinfo>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sinkless/edge_set.hpp"
#include "sinkless/graph.hpp"

namespace sinkless {

// ---------------------------------------------------------------------------
// Digests and opaque blobs

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
std::uint64_t digest_value(const T& v) {
  if constexpr (requires { v.digest(); }) {
    return v.digest();
  } else if constexpr (std::is_trivially_copyable_v<T>) {
    return fnv1a(&v, sizeof(T));
  } else if constexpr (requires { v.begin(); v.end(); v.size(); }) {
    std::uint64_t h = fnv1a(nullptr, 0);
    for (const auto& x : v) {
      const auto d = digest_value(x);
      h = fnv1a(&d, sizeof d, h);
    }
    return h;
  } else {
    static_assert(sizeof(T) == 0, "no digest for this type");
  }
}

/// Immutable, type-tagged payload. Engines never look inside; equality is by
/// tag and content digest.
class Blob {
 public:
  Blob() = default;

  template <class T>
  static Blob of(T value, std::uint32_t tag = 0) {
    Blob b;
    b.tag_ = tag;
    b.digest_ = digest_value(value);
    b.type_ = &typeid(T);
    b.data_ = std::make_shared<const T>(std::move(value));
    return b;
  }

  bool empty() const { return !data_; }
  std::uint32_t tag() const { return tag_; }
  std::uint64_t digest() const { return fnv1a(&tag_, sizeof tag_, digest_); }

  template <class T>
  const T& as() const {
    if (!data_ || *type_ != typeid(T)) throw std::logic_error("blob holds a different type");
    return *static_cast<const T*>(data_.get());
  }
  template <class T>
  bool holds() const {
    return data_ && *type_ == typeid(T);
  }

  friend bool operator==(const Blob& a, const Blob& b) {
    return a.empty() == b.empty() && a.tag_ == b.tag_ && a.digest_ == b.digest_;
  }

 private:
  std::uint32_t tag_ = 0;
  std::uint64_t digest_ = 0;
  const std::type_info* type_ = nullptr;
  std::shared_ptr<const void> data_;
};

inline constexpr std::uint64_t kNoKey = ~std::uint64_t{0};

/// What a processed node leaves behind: its state and output, plus a mark
/// bitset and a key the engine can index for lookups.
struct Record {
  std::uint64_t marks = 0;
  std::uint64_t key = kNoKey;
  Blob state;
  Blob output;
};

// ---------------------------------------------------------------------------
// Errors

class LocalityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExecutionError : public std::runtime_error {
 public:
  ExecutionError(const std::string& what, NodeId node, std::size_t position, std::exception_ptr cause)
      : std::runtime_error(what), node(node), position(position), cause(std::move(cause)) {}

  template <class E>
  bool caused_by() const {
    try {
      if (cause) std::rethrow_exception(cause);
    } catch (const E&) {
      return true;
    } catch (...) {
    }
    return false;
  }

  NodeId node;
  std::size_t position;
  std::exception_ptr cause;
};

// ---------------------------------------------------------------------------
// World and record store

struct World {
  const Multigraph* graph = nullptr;
  std::vector<Identifier> ids;
  std::optional<TwoColoring> coloring;
  std::optional<EdgeSet> input;  // absent: every edge is an input edge
  bool supported = false;        // structure and IDs are global knowledge

  std::size_t n() const { return graph->node_count(); }
};

inline World make_world(const Multigraph& g, std::vector<Identifier> ids = {}) {
  if (ids.empty()) {
    ids.resize(g.node_count());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
  }
  if (ids.size() != g.node_count()) throw std::invalid_argument("identifier count does not match node count");
  return World{&g, std::move(ids), std::nullopt, std::nullopt, false};
}

inline constexpr std::uint32_t kTopLayer = 1;
inline constexpr std::uint32_t dep_layer_of(std::uint32_t layer) { return 2 * layer; }

struct StoreEntry {
  NodeId holder;  // the top-level node whose state carries this record
  int delta;      // upper bound on dist(holder, subject)
  Record record;
};

struct ExecOptions {
  bool enforce = true;        // throw when the physical radius exceeds the top view's radius
  bool use_index = true;      // nearest-mark queries via incremental index, else by scanning
  bool verify_keyed = false;  // check keyed lookups against exact distances
};

class Engine;

namespace detail {

struct NearLabel {
  int dist = std::numeric_limits<int>::max();
  Identifier id = 0;
  NodeId node = 0;
  bool better_than(const NearLabel& o) const { return dist != o.dist ? dist < o.dist : id < o.id; }
};

struct LayerStore {
  std::vector<std::optional<StoreEntry>> entries;
  std::size_t count = 0;
  int max_delta = 0;
  std::vector<NodeId> order;
  std::unordered_map<std::uint64_t, std::vector<NodeId>> by_key;
  std::map<std::uint64_t, std::vector<NearLabel>> near;  // per mark bit
};

struct Scratch {
  std::vector<int> dist;
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
  void reset(std::size_t n) {
    if (dist.size() != n) {
      dist.assign(n, 0);
      stamp.assign(n, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
  bool has(NodeId v) const { return stamp[v] == epoch; }
  int get(NodeId v) const { return has(v) ? dist[v] : kUnreached; }
  bool offer(NodeId v, int d) {
    if (has(v) && dist[v] <= d) return false;
    stamp[v] = epoch;
    dist[v] = d;
    return true;
  }
};

}  // namespace detail

class View;
using Forcer = std::function<void(View& requester, NodeId subject)>;

/// Owns the record layers of one execution.
class Engine {
 public:
  explicit Engine(const World& world, ExecOptions opt = {}) : world_(&world), opt_(opt) {}

  const World& world() const { return *world_; }
  const Multigraph& graph() const { return *world_->graph; }
  const ExecOptions& options() const { return opt_; }
  std::size_t n() const { return world_->n(); }

  detail::LayerStore& layer(std::uint32_t l) {
    auto& s = layers_[l];
    if (s.entries.size() != n()) s.entries.resize(n());
    return s;
  }
  const StoreEntry* find(std::uint32_t l, NodeId v) {
    auto& s = layer(l);
    return s.entries[v] ? &*s.entries[v] : nullptr;
  }
  bool complete(std::uint32_t l) { return layer(l).count == n(); }

  void publish(std::uint32_t l, NodeId subject, NodeId holder, int delta, Record rec) {
    auto& s = layer(l);
    if (s.entries[subject])
      throw std::logic_error("record for node " + std::to_string(subject) + " published twice in layer " +
                             std::to_string(l));
    if (rec.key != kNoKey) s.by_key[rec.key].push_back(subject);
    const auto marks = rec.marks;
    s.entries[subject] = StoreEntry{holder, delta, std::move(rec)};
    ++s.count;
    s.max_delta = std::max(s.max_delta, delta);
    s.order.push_back(subject);
    for (auto& [bit, field] : s.near)
      if (marks & bit) grow_index(field, {subject});
  }

  /// Index of nearest marked subjects, built on first use and then updated
  /// incrementally on every publish.
  const std::vector<detail::NearLabel>& near_index(std::uint32_t l, std::uint64_t bit) {
    auto& s = layer(l);
    auto it = s.near.find(bit);
    if (it != s.near.end()) return it->second;
    auto& field = s.near[bit];
    field.assign(n(), detail::NearLabel{});
    std::vector<NodeId> sources;
    for (NodeId v : s.order)
      if (s.entries[v]->record.marks & bit) sources.push_back(v);
    grow_index(field, sources);
    return field;
  }

  std::size_t publications(std::uint32_t l) { return layer(l).order.size(); }
  const std::vector<NodeId>& order(std::uint32_t l) { return layer(l).order; }

  /// All layers currently present, ascending.
  std::vector<std::uint32_t> layer_ids() const {
    std::vector<std::uint32_t> out;
    for (const auto& [l, s] : layers_) out.push_back(l);
    return out;
  }

  detail::Scratch* acquire_scratch() {
    if (free_.empty()) {
      pool_.push_back(std::make_unique<detail::Scratch>());
      free_.push_back(pool_.back().get());
    }
    auto* s = free_.back();
    free_.pop_back();
    s->reset(n());
    return s;
  }
  void release_scratch(detail::Scratch* s) { free_.push_back(s); }

  /// Copy of the records only (no indexes, no scratch), optionally over a
  /// different world and with some entries removed.
  Engine clone(const World& world, const std::function<bool(std::uint32_t, NodeId, const StoreEntry&)>& keep = {}) const {
    Engine e(world, opt_);
    for (const auto& [l, s] : layers_) {
      e.layer(l);
      for (NodeId v : s.order) {
        const auto& entry = *s.entries[v];
        if (keep && !keep(l, v, entry)) continue;
        e.publish(l, v, entry.holder, entry.delta, entry.record);
      }
    }
    return e;
  }

  void set_options(ExecOptions o) { opt_ = o; }

 private:
  void grow_index(std::vector<detail::NearLabel>& field, const std::vector<NodeId>& sources) {
    const auto& g = graph();
    std::vector<NodeId> queue;
    for (NodeId s : sources) {
      detail::NearLabel lab{0, world_->ids[s], s};
      if (!lab.better_than(field[s])) continue;
      field[s] = lab;
      queue.push_back(s);
    }
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const NodeId x = queue[h];
      const auto lab = field[x];
      // A label may have been superseded after x was queued.
      for (const auto& inc : g.incident(x)) {
        detail::NearLabel cand{lab.dist + 1, lab.id, lab.node};
        if (cand.better_than(field[inc.other])) {
          field[inc.other] = cand;
          queue.push_back(inc.other);
        }
      }
    }
  }

  const World* world_;
  ExecOptions opt_;
  std::map<std::uint32_t, detail::LayerStore> layers_;
  std::vector<std::unique_ptr<detail::Scratch>> pool_;
  std::vector<detail::Scratch*> free_;
};

// ---------------------------------------------------------------------------
// Views

class View {
 public:
  struct Hit {
    NodeId node;
    int dist;
  };

  /// Top-level view for processing `root`.
  View(Engine& eng, NodeId root, int radius, std::uint32_t layer = kTopLayer)
      : View(eng, root, radius, layer, nullptr, 0, nullptr) {}

  /// Nested view: `offset` bounds the distance from the top-level root to
  /// this view's root.
  View(Engine& eng, NodeId root, int radius, std::uint32_t layer, View* parent, int offset, Forcer forcer)
      : eng_(&eng),
        root_(root),
        radius_(radius),
        layer_(layer),
        top_(parent ? parent->top_ : this),
        offset_(offset),
        forcer_(std::move(forcer)),
        scratch_(eng.acquire_scratch()) {
    scratch_->offer(root, 0);
  }

  View(const View&) = delete;
  View& operator=(const View&) = delete;
  ~View() { eng_->release_scratch(scratch_); }

  Engine& engine() const { return *eng_; }
  NodeId root() const { return root_; }
  int radius() const { return radius_; }
  std::uint32_t layer() const { return layer_; }
  int offset() const { return offset_; }
  NodeId top_root() const { return top_->root_; }
  std::size_t n() const { return eng_->n(); }
  bool supported() const { return eng_->world().supported; }

  /// Largest physical radius charged so far (meaningful on the top view).
  int max_charge() const { return max_charge_; }

  bool known(NodeId u) const { return scratch_->has(u); }
  int dist(NodeId u) const {
    const int d = scratch_->get(u);
    if (d == kUnreached) throw LocalityViolation("node " + std::to_string(u) + " was never reached from root " +
                                                 std::to_string(root_));
    return d;
  }

  std::span<const Incidence> incident(NodeId u) {
    const int d = dist(u);
    if (!supported()) charge(d);
    else if (d > radius_) throw LocalityViolation("incidence of node outside the view");
    const auto inc = eng_->graph().incident(u);
    for (const auto& i : inc) scratch_->offer(i.other, d + 1);
    return inc;
  }
  std::size_t degree(NodeId u) { return incident(u).size(); }

  Identifier id(NodeId u) {
    const int d = dist(u);
    if (!supported()) charge(d);
    return eng_->world().ids[u];
  }
  Color color(NodeId u) {
    const int d = dist(u);
    if (!supported()) charge(d);
    const auto& c = eng_->world().coloring;
    if (!c) throw std::logic_error("world has no 2-coloring");
    return (*c)[u];
  }

  /// Input status of an edge; visible iff an endpoint is within the radius.
  bool is_input(EdgeId e) {
    const auto [a, b] = eng_->graph().endpoints(e);
    int d = std::numeric_limits<int>::max();
    if (known(a)) d = std::min(d, dist(a));
    if (known(b)) d = std::min(d, dist(b));
    if (d == std::numeric_limits<int>::max()) throw LocalityViolation("edge with no reached endpoint");
    charge(d);
    const auto& in = eng_->world().input;
    return !in || in->test(e);
  }

  /// Record of an earlier processed node in this view's own layer.
  const Record* record(NodeId u) {
    const int d = dist(u);
    const auto* entry = eng_->find(layer_, u);
    if (!entry) {
      charge(d, eng_->layer(layer_).max_delta);
      return nullptr;
    }
    charge(d, extra_for(*entry));
    return &entry->record;
  }

  /// Record of u in the dependency layer, computed on demand when a forcer is
  /// attached.
  const Record& dep(NodeId u) {
    const int d = dist(u);
    const auto dl = dep_layer_of(layer_);
    const auto* entry = eng_->find(dl, u);
    if (!entry) {
      if (!forcer_)
        throw std::logic_error("dependency output missing for node " + std::to_string(u) + " in layer " +
                               std::to_string(dl));
      if (d > radius_) throw LocalityViolation("dependency read outside the view");
      forcer_(*this, u);
      entry = eng_->find(dl, u);
      if (!entry) throw std::logic_error("forcer did not publish a record");
    }
    charge(d, extra_for(*entry));
    return entry->record;
  }

  /// Nearest earlier-processed node (own layer) whose record carries `bit`,
  /// within `limit`; ties go to the lower Identifier.
  std::optional<Hit> nearest_marked(std::uint64_t bit, int limit) {
    if (eng_->options().use_index) {
      const auto& field = eng_->near_index(layer_, bit);
      return index_hit(field, limit, eng_->layer(layer_).max_delta);
    }
    return scan_nearest(limit, [&](NodeId u) {
      const auto* r = record(u);
      return r && (r->marks & bit);
    });
  }

  /// Nearest node whose dependency record carries `bit`, within `limit`.
  /// Every node closer than the answer has its dependency record computed.
  std::optional<Hit> nearest_dep_marked(std::uint64_t bit, int limit) {
    const auto dl = dep_layer_of(layer_);
    if (eng_->options().use_index && eng_->complete(dl)) {
      const auto& field = eng_->near_index(dl, bit);
      return index_hit(field, limit, eng_->layer(dl).max_delta);
    }
    return scan_nearest(limit, [&](NodeId u) { return (dep(u).marks & bit) != 0; });
  }

  /// Some own-layer node whose record has `key` and lies within `rho` of the
  /// reached node `anchor`. The caller guarantees that such records, if any
  /// exist, lie within that distance.
  std::optional<NodeId> find_keyed(std::uint64_t key, NodeId anchor, int rho) {
    const int d = dist(anchor);
    auto& s = eng_->layer(layer_);
    auto it = s.by_key.find(key);
    if (it == s.by_key.end() || it->second.empty()) {
      charge(d + rho, s.max_delta);
      return std::nullopt;
    }
    const NodeId x = it->second.front();
    if (eng_->options().verify_keyed) {
      const auto dd = bfs_distances(eng_->graph(), anchor, rho);
      for (NodeId y : it->second)
        if (dd[y] == kUnreached)
          throw LocalityViolation("keyed record of node " + std::to_string(y) + " lies beyond the promised radius");
    }
    charge(d + rho, extra_for(*s.entries[x]));
    scratch_->offer(x, d + rho);
    return x;
  }

  /// Nodes reachable from the reached node `start` by walks of length at most
  /// `limit` through nodes accepted by `pass`, in BFS order. Rejected
  /// neighbors are reported once in `fringe` and not expanded.
  template <class Pass>
  std::vector<NodeId> explore(NodeId start, int limit, Pass&& pass, std::vector<NodeId>* fringe = nullptr) {
    detail::Scratch* local = eng_->acquire_scratch();
    std::vector<NodeId> out{start};
    local->offer(start, 0);
    for (std::size_t h = 0; h < out.size(); ++h) {
      const NodeId x = out[h];
      const int dx = local->get(x);
      if (dx >= limit) continue;
      for (const auto& inc : incident(x)) {
        if (!local->offer(inc.other, dx + 1)) continue;
        if (pass(inc.other))
          out.push_back(inc.other);
        else if (fringe)
          fringe->push_back(inc.other);
      }
    }
    eng_->release_scratch(local);
    return out;
  }

  /// Called on nested views to propagate charges.
  void note_physical(int phys) {
    if (phys > max_charge_) max_charge_ = phys;
    if (eng_->options().enforce && phys > radius_)
      throw LocalityViolation("physical radius " + std::to_string(phys) + " exceeds declared locality " +
                              std::to_string(radius_) + " at node " + std::to_string(root_));
  }

 private:
  int extra_for(const StoreEntry& e) const { return e.holder == top_->root_ ? 0 : e.delta; }

  void charge(int d, int extra = 0) {
    if (d > radius_ && (eng_->options().enforce || top_ != this))
      throw LocalityViolation("read at distance " + std::to_string(d) + " in a radius-" + std::to_string(radius_) +
                              " view rooted at " + std::to_string(root_));
    if (d > local_max_) local_max_ = d;
    top_->note_physical(offset_ + d + extra);
  }

  std::optional<Hit> index_hit(const std::vector<detail::NearLabel>& field, int limit, int max_delta) {
    const auto& lab = field[root_];
    if (lab.dist > limit) {
      charge(limit, max_delta);
      return std::nullopt;
    }
    charge(lab.dist, max_delta);
    scratch_->offer(lab.node, lab.dist);
    return Hit{lab.node, lab.dist};
  }

  template <class Pred>
  std::optional<Hit> scan_nearest(int limit, Pred&& marked) {
    // Level-synchronous BFS so that all nodes at the winning distance are
    // examined before choosing by Identifier.
    std::vector<NodeId> level{root_};
    detail::Scratch* local = eng_->acquire_scratch();
    local->offer(root_, 0);
    std::optional<Hit> best;
    Identifier best_id = 0;
    for (int d = 0; d <= limit && !level.empty(); ++d) {
      for (NodeId u : level) {
        if (!marked(u)) continue;
        const Identifier uid = eng_->world().ids[u];
        if (!best || uid < best_id) {
          best = Hit{u, d};
          best_id = uid;
        }
      }
      if (best) break;
      if (d == limit) break;
      std::vector<NodeId> next;
      for (NodeId u : level)
        for (const auto& inc : incident(u))
          if (local->offer(inc.other, d + 1)) next.push_back(inc.other);
      level.swap(next);
    }
    eng_->release_scratch(local);
    if (!best) charge(limit, eng_->layer(layer_).max_delta);
    return best;
  }

  Engine* eng_;
  NodeId root_;
  int radius_;
  std::uint32_t layer_;
  View* top_;
  int offset_;
  Forcer forcer_;
  detail::Scratch* scratch_;
  int max_charge_ = 0;
  int local_max_ = 0;
};

// ---------------------------------------------------------------------------
// Algorithms

using LocalityFn = std::function<int(std::size_t n)>;

inline LocalityFn constant_locality(int r) {
  return [r](std::size_t) { return r; };
}

struct LocalAlgorithm {
  std::string name;
  LocalityFn locality;
  std::function<Blob(View&)> decide;
};

struct SlocalAlgorithm {
  std::string name;
  LocalityFn locality;
  std::function<Record(View&)> step;
};

struct SlocalRun {
  std::vector<Record> records;  // top layer, indexed by NodeId
  int measured_radius = 0;
  int declared_locality = 0;
  std::map<std::uint32_t, std::vector<NodeId>> orders;  // publication order per layer
  std::map<std::uint32_t, std::size_t> publications;
  std::map<std::uint32_t, std::vector<std::optional<Record>>> inner;  // other layers, when kept

  std::vector<Blob> outputs() const {
    std::vector<Blob> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.output);
    return out;
  }
};

inline std::uint64_t digest_outputs(const std::vector<Blob>& outs) {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& b : outs) {
    const auto d = b.digest();
    h = fnv1a(&d, sizeof d, h);
  }
  return h;
}

namespace detail {

template <class Fn>
auto tagged(NodeId v, std::size_t pos, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const LocalityViolation& e) {
    throw LocalityViolation(std::string(e.what()) + " (processing node " + std::to_string(v) + ", position " +
                            std::to_string(pos) + ")");
  } catch (const std::exception& e) {
    throw ExecutionError(std::string(e.what()) + " (processing node " + std::to_string(v) + ", position " +
                             std::to_string(pos) + ")",
                         v, pos, std::current_exception());
  }
}

}  // namespace detail

/// Every node decides from its own view; no records are shared.
inline std::vector<Blob> run_local(const World& world, const LocalAlgorithm& alg,
                                   const std::vector<NodeId>& order = {}, ExecOptions opt = {}) {
  Engine eng(world, opt);
  const int r = alg.locality(world.n());
  std::vector<Blob> out(world.n());
  std::vector<NodeId> seq = order;
  if (seq.empty())
    for (NodeId v = 0; v < world.n(); ++v) seq.push_back(v);
  for (std::size_t pos = 0; pos < seq.size(); ++pos) {
    const NodeId v = seq[pos];
    out[v] = detail::tagged(v, pos, [&] {
      View view(eng, v, r);
      return alg.decide(view);
    });
  }
  return out;
}

inline void check_schedule(const std::vector<NodeId>& sched, std::size_t n) {
  if (sched.size() != n) throw std::invalid_argument("schedule must list every node exactly once");
  std::vector<char> seen(n, 0);
  for (NodeId v : sched) {
    if (v >= n || seen[v]) throw std::invalid_argument("schedule must list every node exactly once");
    seen[v] = 1;
  }
}

/// Runs one step of `alg` at v as a top-level step and publishes the record.
inline int slocal_step(Engine& eng, const SlocalAlgorithm& alg, NodeId v, int radius) {
  View view(eng, v, radius);
  Record rec = alg.step(view);
  eng.publish(kTopLayer, v, v, 0, std::move(rec));
  return view.max_charge();
}

/// Sequential execution in schedule order. `deps`, when given, pre-fills the
/// dependency layer with finished records (a staged run).
inline SlocalRun run_slocal(const World& world, const std::vector<NodeId>& sched, const SlocalAlgorithm& alg,
                            const std::vector<Record>* deps = nullptr, ExecOptions opt = {},
                            bool keep_inner = false) {
  check_schedule(sched, world.n());
  Engine eng(world, opt);
  if (deps) {
    if (deps->size() != world.n()) throw std::invalid_argument("dependency records must cover every node");
    for (NodeId v = 0; v < world.n(); ++v) eng.publish(dep_layer_of(kTopLayer), v, v, 0, (*deps)[v]);
  }
  SlocalRun run;
  run.declared_locality = alg.locality(world.n());
  for (std::size_t pos = 0; pos < sched.size(); ++pos) {
    const NodeId v = sched[pos];
    const int used = detail::tagged(v, pos, [&] { return slocal_step(eng, alg, v, run.declared_locality); });
    run.measured_radius = std::max(run.measured_radius, used);
  }
  run.records.resize(world.n());
  for (NodeId v = 0; v < world.n(); ++v) run.records[v] = eng.find(kTopLayer, v)->record;
  for (auto l : eng.layer_ids()) {
    run.orders[l] = eng.order(l);
    run.publications[l] = eng.publications(l);
    if (keep_inner && l != kTopLayer) {
      auto& recs = run.inner[l];
      recs.resize(world.n());
      for (NodeId v = 0; v < world.n(); ++v)
        if (const auto* entry = eng.find(l, v)) recs[v] = entry->record;
    }
  }
  if (deps) run.orders.erase(dep_layer_of(kTopLayer));
  return run;
}

/// Algorithm C of the composition lemma: runs `b` and computes `a`'s record
/// for a node the first time `b` reads it, storing it with the node being
/// processed. Locality T_a + 2 T_b.
inline SlocalAlgorithm compose_slocal(SlocalAlgorithm a, SlocalAlgorithm b) {
  SlocalAlgorithm c;
  c.name = b.name + "∘" + a.name;
  auto la = a.locality, lb = b.locality;
  c.locality = [la, lb](std::size_t n) { return la(n) + 2 * lb(n); };
  c.step = [a = std::move(a), b = std::move(b)](View& vc) -> Record {
    const std::uint32_t inner = dep_layer_of(vc.layer());
    const int ta = a.locality(vc.n());
    Forcer force = [&a, &vc, inner, ta](View& requester, NodeId u) {
      const int off = requester.offset() + requester.dist(u);
      View av(vc.engine(), u, ta, inner, &vc, off, nullptr);
      Record r = a.step(av);
      vc.engine().publish(inner, u, vc.top_root(), off, std::move(r));
    };
    View bv(vc.engine(), vc.root(), b.locality(vc.n()), vc.layer(), &vc, vc.offset(), std::move(force));
    return b.step(bv);
  };
  return c;
}

/// Fills missing nodes of `partial` from `sched`, keeping the recorded order
/// first. Used to replay a lazily computed stage as a complete run.
inline std::vector<NodeId> complete_order(const std::vector<NodeId>& partial, const std::vector<NodeId>& sched) {
  std::vector<char> seen(sched.size(), 0);
  std::vector<NodeId> out;
  for (NodeId v : partial) {
    seen[v] = 1;
    out.push_back(v);
  }
  for (NodeId v : sched)
    if (!seen[v]) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Schedules

enum class ScheduleKind { identity, reverse, random, bfs, degree, interleave };

inline const std::vector<std::pair<std::string, ScheduleKind>>& schedule_kinds() {
  static const std::vector<std::pair<std::string, ScheduleKind>> k{
      {"identity", ScheduleKind::identity}, {"reverse", ScheduleKind::reverse},
      {"random", ScheduleKind::random},     {"bfs", ScheduleKind::bfs},
      {"degree", ScheduleKind::degree},     {"interleave", ScheduleKind::interleave}};
  return k;
}

inline ScheduleKind parse_schedule(const std::string& s) {
  for (const auto& [name, k] : schedule_kinds())
    if (name == s) return k;
  throw std::invalid_argument("unknown schedule: " + s);
}

inline std::string to_string(ScheduleKind k) {
  for (const auto& [name, kk] : schedule_kinds())
    if (kk == k) return name;
  return "?";
}

namespace detail {

// BFS order over all components, each started from its lowest NodeId.
inline std::vector<NodeId> bfs_order(const Multigraph& g) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<NodeId> out;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    const std::size_t start = out.size();
    out.push_back(s);
    for (std::size_t h = start; h < out.size(); ++h)
      for (const auto& inc : g.incident(out[h]))
        if (!seen[inc.other]) {
          seen[inc.other] = 1;
          out.push_back(inc.other);
        }
  }
  return out;
}

}  // namespace detail

inline std::vector<NodeId> make_schedule(const Multigraph& g, ScheduleKind kind, std::uint64_t seed = 0) {
  const std::size_t n = g.node_count();
  std::vector<NodeId> s(n);
  for (NodeId v = 0; v < n; ++v) s[v] = v;
  switch (kind) {
    case ScheduleKind::identity:
      break;
    case ScheduleKind::reverse:
      std::reverse(s.begin(), s.end());
      break;
    case ScheduleKind::random: {
      std::mt19937_64 rng(seed);
      std::shuffle(s.begin(), s.end(), rng);
      break;
    }
    case ScheduleKind::bfs:
      s = detail::bfs_order(g);
      break;
    case ScheduleKind::degree:
      std::stable_sort(s.begin(), s.end(), [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
      break;
    case ScheduleKind::interleave: {
      // Alternate between the two ends of the BFS order, so consecutive
      // steps tend to be far apart.
      const auto b = detail::bfs_order(g);
      s.clear();
      std::size_t lo = 0, hi = n;
      while (lo < hi) {
        s.push_back(b[lo++]);
        if (lo < hi) s.push_back(b[--hi]);
      }
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Identifier adversaries

enum class IdKind { identity, random, degree };

inline IdKind parse_ids(const std::string& s) {
  if (s == "identity") return IdKind::identity;
  if (s == "random") return IdKind::random;
  if (s == "degree") return IdKind::degree;
  throw std::invalid_argument("unknown id adversary: " + s);
}

inline std::string to_string(IdKind k) {
  switch (k) {
    case IdKind::identity: return "identity";
    case IdKind::random: return "random";
    case IdKind::degree: return "degree";
  }
  return "?";
}

/// n distinct values drawn uniformly from [1, n^c], sorted ascending.
inline std::vector<Identifier> sample_identifiers(std::size_t n, int c, std::mt19937_64& rng) {
  Identifier hi = 1;
  for (int i = 0; i < c; ++i) hi *= std::max<Identifier>(n, 2);
  std::uniform_int_distribution<Identifier> pick(1, hi);
  std::unordered_set<Identifier> used;
  std::vector<Identifier> out;
  while (out.size() < n) {
    const auto x = pick(rng);
    if (used.insert(x).second) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// identity: v -> v+1. random: injective map into [1, n^c]. degree: values
/// from [1, n^c] handed out in descending-degree order, so high-degree nodes
/// get the small identifiers.
inline std::vector<Identifier> make_ids(const Multigraph& g, IdKind kind, std::uint64_t seed = 0, int c = 2) {
  const std::size_t n = g.node_count();
  std::vector<Identifier> ids(n);
  std::mt19937_64 rng(seed);
  switch (kind) {
    case IdKind::identity:
      for (NodeId v = 0; v < n; ++v) ids[v] = v + 1;
      break;
    case IdKind::random: {
      auto vals = sample_identifiers(n, c, rng);
      std::shuffle(vals.begin(), vals.end(), rng);
      ids = std::move(vals);
      break;
    }
    case IdKind::degree: {
      const auto vals = sample_identifiers(n, c, rng);
      std::vector<NodeId> byd(n);
      for (NodeId v = 0; v < n; ++v) byd[v] = v;
      std::stable_sort(byd.begin(), byd.end(), [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
      for (std::size_t i = 0; i < n; ++i) ids[byd[i]] = vals[i];
      break;
    }
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Perturbation testing of the locality contract

struct PerturbationResult {
  bool pass = true;
  int trials = 0;
  std::string witness;  // description of the first perturbation that changed the output
};

/// Runs `sched` up to node v, evaluates v's step, then re-evaluates it after
/// randomly changing data outside B(v, r): identifiers of outside nodes,
/// input status of edges with no endpoint in the ball, and records held by
/// outside nodes. Locality enforcement is off during the check; only output
/// changes count.
inline PerturbationResult perturbation_check(const World& world, const SlocalAlgorithm& alg,
                                             const std::vector<NodeId>& sched, NodeId v, int r, int trials,
                                             std::uint64_t seed, ExecOptions opt = {}) {
  check_schedule(sched, world.n());
  opt.enforce = false;
  Engine base(world, opt);
  const int big = static_cast<int>(world.n()) + 1;
  for (NodeId u : sched) {
    if (u == v) break;
    slocal_step(base, alg, u, big);
  }
  const auto dist = bfs_distances(*world.graph, v, r);
  const auto inside = [&](NodeId u) { return dist[u] != kUnreached; };

  const auto evaluate = [&](const World& w, const std::function<bool(std::uint32_t, NodeId, const StoreEntry&)>& keep) {
    Engine e = base.clone(w, keep);
    View view(e, v, big);
    return alg.step(view).output;
  };
  const Blob reference = evaluate(world, {});

  std::mt19937_64 rng(seed);
  PerturbationResult res;
  std::unordered_set<Identifier> inside_ids;
  for (NodeId u = 0; u < world.n(); ++u)
    if (inside(u)) inside_ids.insert(world.ids[u]);
  const Identifier hi = static_cast<Identifier>(world.n()) * world.n() + world.n() + 1;
  for (int t = 0; t < trials; ++t) {
    World w = world;
    std::unordered_set<Identifier> used = inside_ids;
    std::uniform_int_distribution<Identifier> pick(1, hi);
    std::size_t changed_ids = 0, flipped = 0, dropped = 0;
    for (NodeId u = 0; u < world.n(); ++u) {
      if (inside(u)) continue;
      Identifier x;
      do x = pick(rng);
      while (!used.insert(x).second);
      w.ids[u] = x;
      ++changed_ids;
    }
    if (w.input) {
      for (EdgeId e = 0; e < world.graph->edge_count(); ++e) {
        const auto [a, b] = world.graph->endpoints(e);
        if (!inside(a) && !inside(b) && (rng() & 1)) {
          w.input->set(e, !w.input->test(e));
          ++flipped;
        }
      }
    }
    const std::uint64_t salt = rng();
    const auto keep = [&](std::uint32_t layer, NodeId subject, const StoreEntry& entry) {
      if (inside(entry.holder)) return true;
      const bool k = (fnv1a(&subject, sizeof subject, salt ^ layer) & 1) != 0;
      if (!k) ++dropped;
      return k;
    };
    const Blob out = evaluate(w, keep);
    ++res.trials;
    if (!(out == reference)) {
      res.pass = false;
      res.witness = "trial " + std::to_string(t) + ": " + std::to_string(changed_ids) + " outside identifiers changed, " +
                    std::to_string(flipped) + " invisible edges flipped, " + std::to_string(dropped) +
                    " outside records dropped";
      return res;
    }
  }
  return res;
}

/// Materialized radius-r view: the nodes of B(root, r) and the visible edges.
struct ViewSnapshot {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;
};

inline ViewSnapshot snapshot(View& view) {
  ViewSnapshot s;
  s.nodes = view.explore(view.root(), view.radius(), [](NodeId) { return true; });
  std::set<EdgeId> edges;
  for (NodeId u : s.nodes)
    for (const auto& inc : view.incident(u)) edges.insert(inc.edge);
  s.edges.assign(edges.begin(), edges.end());
  std::sort(s.nodes.begin(), s.nodes.end());
  return s;
}

}  // namespace sinkless
