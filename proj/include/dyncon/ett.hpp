#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_set>
#include <vector>

#include "dyncon/edge.hpp"
#include "dyncon/hooks.hpp"
#include "dyncon/multiset.hpp"

namespace dyncon {

class RemovalOp;

enum class NodeKind : std::uint8_t { vertex, arc };

// Cartesian-tree node of an Euler tour. Readers only ever load `parent`
// and `version`; everything else belongs to the component's writer.
//
// Parent links always point to a node with strictly higher
// (priority, serial), so the parent graph is acyclic at every instant
// and upward walks terminate.
class Node {
 public:
  std::atomic<Node*> parent{nullptr};
  Node* left = nullptr;
  Node* right = nullptr;
  std::uint64_t priority = 0;
  std::uint64_t serial = 0;  // stable id; defines the lock order
  std::atomic<std::uint64_t> version{0};

  std::uint32_t vertex_count = 0;  // vertex nodes in subtree (incl. self)
  std::uint32_t tour_size = 0;     // all nodes in subtree (incl. self)

  std::atomic<bool> has_non_spanning{false};
  bool has_spanning = false;   // subtree holds an arc whose edge sits at this level
  bool spanning_here = false;  // this arc's edge sits at this forest's level

  NodeKind kind = NodeKind::vertex;
  Vertex a = 0;  // vertex id, or tail of the directed arc a -> b
  Vertex b = 0;

  EdgeMultiset edges;  // vertex nodes only

  std::atomic<RemovalOp*> removal_op{nullptr};  // meaningful at F_0 roots
  std::mutex lock;                              // meaningful at F_0 roots

  bool higher_than(const Node& o) const {
    if (priority != o.priority) return priority > o.priority;
    return serial > o.serial;
  }
};

struct RootInfo {
  Node* root = nullptr;
  std::uint64_t version = 0;
  friend bool operator==(const RootInfo&, const RootInfo&) = default;
};

// Follows parent links to the sink and returns it with the version read
// after the null parent was observed. Lock-free.
RootInfo find_root(const Node* start);

// True iff the parent chain from `start` passes through `target` before
// reaching a sink. Lock-free.
bool chain_passes(const Node* start, const Node* target);

// The linearizable connectivity check over raw nodes. The template
// parameter exists for the test that reproduces the broken variant
// without the final re-verification.
template <bool kFullRecheck>
bool connected_nodes(const Node* nu, const Node* nv, std::uint64_t* attempts) {
  if (nu == nv) return true;
  std::uint64_t tries = 0;
  while (true) {
    ++tries;
    RootInfo ru = find_root(nu);
    RootInfo rv = find_root(nv);
    if (find_root(nu) != ru) continue;
    if (ru.root != rv.root) {
      // Likely different components; re-check that both snapshots were
      // taken atomically.
      if (find_root(nv) != rv) continue;
      if constexpr (kFullRecheck) {
        if (find_root(nu) != ru) continue;
      }
    }
    if (attempts) *attempts += tries;
    return ru.root == rv.root;
  }
}

// Monotone counters shared by all forests of one engine, so that node
// identities and priorities are deterministic for a fixed seed.
class NodeIdSource {
 public:
  explicit NodeIdSource(std::uint64_t seed) : seed_(seed) {}
  void fill(Node& n) {
    std::uint64_t idx = next_.fetch_add(1, std::memory_order_relaxed);
    n.serial = idx + 1;
    std::uint64_t s = seed_ + 0x9e3779b97f4a7c15ull * (idx + 1);
    n.priority = detail::splitmix64(s);
  }

 private:
  std::uint64_t seed_;
  std::atomic<std::uint64_t> next_{0};
};

// A spanning-edge cut of the Euler tour that has been fully prepared but
// not yet made visible to readers: both sides are assembled, every
// non-sink side root points directly at the old sink, and the final
// parent-link clears are held back.
struct PendingCut {
  Node* inner_root = nullptr;  // tour segment strictly between the arcs
  Node* outer_root = nullptr;
  Node* sink = nullptr;        // unique current sink (may be a removed arc)
  Node* marker = nullptr;      // non-sink side root; side classifier
  Node* arc1 = nullptr;        // detached arcs, to retire when the op ends
  Node* arc2 = nullptr;
};

// One Euler tour forest over n vertices (one level of the structure).
// Single writer per component; any number of lock-free readers.
class EulerTour {
 public:
  EulerTour(std::uint32_t n, std::uint32_t level, NodeIdSource* ids);
  ~EulerTour();

  std::uint32_t vertex_total() const { return n_; }
  std::uint32_t level() const { return level_; }

  Node* vertex_node(Vertex v) const { return vertices_[v].get(); }

  RootInfo root_of(Vertex v) const { return find_root(vertex_node(v)); }

  bool connected(Vertex u, Vertex v, std::uint64_t* attempts = nullptr) const {
    return connected_nodes<true>(vertex_node(u), vertex_node(v), attempts);
  }

  // ---- writer operations (caller holds the component lock(s)) ----

  void bump_root_version(Node* root);

  // Merges the trees of u and v, splicing two new arc nodes into the
  // tour. Returns (arc u->v, arc v->u).
  std::pair<Node*, Node*> link(Vertex u, Vertex v, bool edge_at_this_level);

  // Full split, immediately visible. Arcs are unregistered but not
  // freed; the caller retires them when its operation completes.
  void cut(Node* arc_uv, Node* arc_vu);

  PendingCut cut_prepare(Node* arc_uv, Node* arc_vu);
  // Publishes the split: clears the held-back parent links.
  void commit_split(PendingCut& p);
  // Reconnects the two pending sides through replacement edge (fu, fv)
  // instead of splitting; readers observe a single component
  // throughout. Returns the new arcs.
  std::pair<Node*, Node*> commit_swap(PendingCut& p, Vertex fu, Vertex fv,
                                      bool edge_at_this_level);

  // ---- non-spanning edge bookkeeping (Appendix-style helpers) ----

  // Lock-free: publishes one info copy at each endpoint and raises
  // has_non_spanning along both root paths.
  void add_info(Edge e);
  // Lock-free: removes one copy from each endpoint, touching no flags.
  void remove_info(Edge e);
  static void set_flags_up(Node* n);
  // Writer-only flag recomputation with the lost-update re-check.
  static void recalculate_flags(Node* n);

  // ---- writer helpers ----

  Node* structural_root(Node* n) const;
  static std::uint32_t tour_position(Node* n, Node* stop_root);
  // Which pending side a node belongs to (structural walk).
  static Node* pending_side_of(Node* n, const PendingCut& p);

  // Weighted by subtree vertex counts; returns the chosen vertex node.
  Node* random_vertex_in(Node* side_root, std::uint64_t rnd) const;

  // ---- introspection / checking ----

  // In-order traversal of the structural tree rooted at `root`.
  std::vector<const Node*> tour_of(const Node* root) const;
  // Validates heap order, parent/child agreement, cached sizes, flag
  // soundness and Euler-tour walk semantics. Returns an empty string if
  // consistent, else a description of the first violation.
  std::string check_component(const Node* root) const;

  // All structural roots (one per component), via a full vertex scan.
  std::vector<Node*> component_roots() const;

 private:
  Node* new_arc(Vertex from, Vertex to, bool edge_at_this_level);

  static std::uint32_t size_of(const Node* n) { return n ? n->tour_size : 0; }
  static std::uint32_t vertices_of(const Node* n) { return n ? n->vertex_count : 0; }
  static void pull(Node* t);

  // Implicit-key treap split/join. Splits keep the far piece root's old
  // parent pointer; joins re-hang piece roots under same-component
  // nodes. Neither ever stores a null parent.
  static void split(Node* t, std::uint32_t k, Node*& l, Node*& r);
  static Node* join(Node* l, Node* r);

  std::uint32_t n_;
  std::uint32_t level_;
  NodeIdSource* ids_;
  std::vector<std::unique_ptr<Node>> vertices_;

  mutable std::mutex arcs_mu_;  // registry only; not part of the protocol
  std::unordered_set<Node*> live_arcs_;
};

}  // namespace dyncon
