#include "dyncon/ett.hpp"

#include <cassert>
#include <sstream>
#include <unordered_map>

namespace dyncon {

RootInfo find_root(const Node* start) {
  const Node* cur = start;
  while (true) {
    Node* p = cur->parent.load(std::memory_order_acquire);
    hooks::emit(hooks::Point::read_parent, cur, p);
    if (p == nullptr) break;
    cur = p;
  }
  hooks::emit(hooks::Point::read_version, cur, nullptr);
  std::uint64_t ver = cur->version.load(std::memory_order_acquire);
  return RootInfo{const_cast<Node*>(cur), ver};
}

bool chain_passes(const Node* start, const Node* target) {
  const Node* cur = start;
  while (cur) {
    if (cur == target) return true;
    cur = cur->parent.load(std::memory_order_acquire);
  }
  return false;
}

EulerTour::EulerTour(std::uint32_t n, std::uint32_t level, NodeIdSource* ids)
    : n_(n), level_(level), ids_(ids) {
  if (n == 0) throw std::invalid_argument("vertex count must be positive");
  vertices_.reserve(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    auto node = std::make_unique<Node>();
    ids_->fill(*node);
    node->kind = NodeKind::vertex;
    node->a = v;
    node->vertex_count = 1;
    node->tour_size = 1;
    vertices_.push_back(std::move(node));
  }
}

EulerTour::~EulerTour() {
  for (Node* arc : live_arcs_) delete arc;
}

Node* EulerTour::new_arc(Vertex from, Vertex to, bool edge_at_this_level) {
  Node* n = new Node();
  ids_->fill(*n);
  n->kind = NodeKind::arc;
  n->a = from;
  n->b = to;
  n->vertex_count = 0;
  n->tour_size = 1;
  n->spanning_here = edge_at_this_level;
  n->has_spanning = edge_at_this_level;
  {
    std::lock_guard<std::mutex> lk(arcs_mu_);
    live_arcs_.insert(n);
  }
  return n;
}

void EulerTour::bump_root_version(Node* root) {
  assert(root->parent.load(std::memory_order_relaxed) == nullptr);
  if (hooks::fault_skip_version_bump()) return;
  std::uint64_t v = root->version.load(std::memory_order_relaxed);
  root->version.store(v + 1, std::memory_order_release);
}

namespace {
bool wants_non_spanning_flag(const Node* t) {
  if (t->kind == NodeKind::vertex && t->edges.maybe_nonempty()) return true;
  if (t->left && t->left->has_non_spanning.load(std::memory_order_seq_cst)) return true;
  if (t->right && t->right->has_non_spanning.load(std::memory_order_seq_cst)) return true;
  return false;
}
}  // namespace

void EulerTour::recalculate_flags(Node* t) {
  bool want = wants_non_spanning_flag(t);
  t->has_non_spanning.store(want, std::memory_order_seq_cst);
  if (!want) {
    // A concurrent lock-free adder may have raised the flag between the
    // recomputation and the store; check whether true was overridden.
    if (wants_non_spanning_flag(t)) {
      t->has_non_spanning.store(true, std::memory_order_seq_cst);
    }
  }
}

void EulerTour::pull(Node* t) {
  std::uint32_t vc = (t->kind == NodeKind::vertex) ? 1 : 0;
  std::uint32_t ts = 1;
  bool sp = t->spanning_here;
  if (t->left) {
    vc += t->left->vertex_count;
    ts += t->left->tour_size;
    sp = sp || t->left->has_spanning;
  }
  if (t->right) {
    vc += t->right->vertex_count;
    ts += t->right->tour_size;
    sp = sp || t->right->has_spanning;
  }
  t->vertex_count = vc;
  t->tour_size = ts;
  t->has_spanning = sp;
  recalculate_flags(t);
}

void EulerTour::set_flags_up(Node* n) {
  while (n) {
    if (n->has_non_spanning.load(std::memory_order_seq_cst)) return;
    n->has_non_spanning.store(true, std::memory_order_seq_cst);
    n = n->parent.load(std::memory_order_acquire);
  }
}

void EulerTour::add_info(Edge e) {
  Node* nu = vertex_node(e.u);
  nu->edges.add(e);
  set_flags_up(nu);
  Node* nv = vertex_node(e.v);
  nv->edges.add(e);
  set_flags_up(nv);
}

void EulerTour::remove_info(Edge e) {
  bool ru = vertex_node(e.u)->edges.remove_one(e);
  bool rv = vertex_node(e.v)->edges.remove_one(e);
  assert(ru && rv && "remove_info without a stored copy");
  (void)ru;
  (void)rv;
}

Node* EulerTour::structural_root(Node* n) const {
  while (true) {
    Node* p = n->parent.load(std::memory_order_relaxed);
    if (!p) return n;
    n = p;
  }
}

std::uint32_t EulerTour::tour_position(Node* n, Node* stop_root) {
  std::uint32_t k = size_of(n->left);
  while (n != stop_root) {
    Node* p = n->parent.load(std::memory_order_relaxed);
    assert(p != nullptr);
    if (p->right == n) k += size_of(p->left) + 1;
    n = p;
  }
  return k;
}

void EulerTour::split(Node* t, std::uint32_t k, Node*& l, Node*& r) {
  if (!t) {
    l = r = nullptr;
    return;
  }
  if (k <= size_of(t->left)) {
    Node *a, *b;
    split(t->left, k, a, b);
    t->left = b;
    if (b) b->parent.store(t, std::memory_order_release);
    pull(t);
    l = a;
    r = t;
  } else {
    Node *a, *b;
    split(t->right, k - size_of(t->left) - 1, a, b);
    t->right = a;
    if (a) a->parent.store(t, std::memory_order_release);
    pull(t);
    l = t;
    r = b;
  }
}

Node* EulerTour::join(Node* l, Node* r) {
  if (!l) return r;
  if (!r) return l;
  if (l->higher_than(*r)) {
    Node* j = join(l->right, r);
    l->right = j;
    j->parent.store(l, std::memory_order_release);
    pull(l);
    return l;
  }
  Node* j = join(l, r->left);
  r->left = j;
  j->parent.store(r, std::memory_order_release);
  pull(r);
  return r;
}

std::pair<Node*, Node*> EulerTour::link(Vertex u, Vertex v, bool edge_at_this_level) {
  Node* du = vertex_node(u);
  Node* dv = vertex_node(v);
  Node* ru = structural_root(du);
  Node* rv = structural_root(dv);
  assert(ru != rv && "link endpoints must be in different trees");

  // Versions move one step ahead of any structural change.
  bump_root_version(ru);
  bump_root_version(rv);

  Node* a = ru->higher_than(*rv) ? ru : rv;
  Node* b = (a == ru) ? rv : ru;

  Node* arc1 = new_arc(u, v, edge_at_this_level);
  Node* arc2 = new_arc(v, u, edge_at_this_level);

  // Logical merge: from this store on, readers observe one component.
  b->parent.store(a, std::memory_order_release);

  Node* rstar = a;
  if (arc1->higher_than(*rstar)) rstar = arc1;
  if (arc2->higher_than(*rstar)) rstar = arc2;
  // A fresh arc outranking the surviving root takes the root over with a
  // single store; every chain through `a` extends to it.
  if (rstar != a) a->parent.store(rstar, std::memory_order_release);
  // Route the fresh arcs at the sink before anything can hang below them.
  if (arc1 != rstar) arc1->parent.store(rstar, std::memory_order_release);
  if (arc2 != rstar) arc2->parent.store(rstar, std::memory_order_release);

  // Restructure. Every store below re-hangs a piece inside the already
  // merged component, so readers never observe a partition change.
  std::uint32_t pu = tour_position(du, ru);
  Node *pa, *pb;
  split(ru, pu + 1, pa, pb);  // pa ends with u's node
  std::uint32_t pv = tour_position(dv, rv);
  Node *pc, *pd;
  split(rv, pv, pc, pd);  // pd starts with v's node

  Node* t = join(pa, arc1);
  t = join(t, pd);
  t = join(t, pc);
  t = join(t, arc2);
  t = join(t, pb);
  assert(t == rstar);
  assert(t->parent.load(std::memory_order_relaxed) == nullptr);
  return {arc1, arc2};
}

PendingCut EulerTour::cut_prepare(Node* arc_uv, Node* arc_vu) {
  assert(arc_uv->kind == NodeKind::arc && arc_vu->kind == NodeKind::arc);
  Node* root = structural_root(arc_uv);
  bump_root_version(root);

  std::uint32_t i = tour_position(arc_uv, root);
  std::uint32_t j = tour_position(arc_vu, root);
  if (i > j) {
    std::swap(arc_uv, arc_vu);
    std::swap(i, j);
  }

  Node *x, *q, *a1, *q2, *m, *q3, *a2, *y;
  split(root, i, x, q);
  split(q, 1, a1, q2);
  split(q2, j - i - 1, m, q3);
  split(q3, 1, a2, y);
  assert(a1 == arc_uv && a2 == arc_vu);

  PendingCut p;
  p.inner_root = m;
  p.outer_root = join(x, y);
  p.sink = root;
  p.arc1 = a1;
  p.arc2 = a2;
  assert(p.inner_root && p.outer_root);

  // Route each held-back side root directly at the sink, so that the
  // side-classification walks used by replacement tests cannot stray
  // through the other side's interior.
  if (p.inner_root != p.sink)
    p.inner_root->parent.store(p.sink, std::memory_order_release);
  if (p.outer_root != p.sink)
    p.outer_root->parent.store(p.sink, std::memory_order_release);
  p.marker = (p.inner_root != p.sink) ? p.inner_root : p.outer_root;

  {
    std::lock_guard<std::mutex> lk(arcs_mu_);
    live_arcs_.erase(p.arc1);
    live_arcs_.erase(p.arc2);
  }
  return p;
}

void EulerTour::commit_split(PendingCut& p) {
  hooks::emit(hooks::Point::before_unlink, p.inner_root, p.outer_root);
  // The first clear is the linearization point of the split. A second
  // clear is needed only when the old sink was one of the removed arcs;
  // it does not change the partition of vertices.
  if (p.inner_root != p.sink)
    p.inner_root->parent.store(nullptr, std::memory_order_release);
  if (p.outer_root != p.sink)
    p.outer_root->parent.store(nullptr, std::memory_order_release);
}

Node* EulerTour::pending_side_of(Node* n, const PendingCut& p) {
  while (true) {
    if (n == p.inner_root) return p.inner_root;
    if (n == p.outer_root) return p.outer_root;
    n = n->parent.load(std::memory_order_relaxed);
    assert(n != nullptr && "node not under either pending side");
  }
}

std::pair<Node*, Node*> EulerTour::commit_swap(PendingCut& p, Vertex fu, Vertex fv,
                                               bool edge_at_this_level) {
  Node* nu = vertex_node(fu);
  Node* nv = vertex_node(fv);
  bool u_inner = pending_side_of(nu, p) == p.inner_root;
  bool v_inner = pending_side_of(nv, p) == p.inner_root;
  assert(u_inner != v_inner && "replacement must straddle the cut");
  Node* inner_end = u_inner ? nu : nv;
  Node* outer_end = u_inner ? nv : nu;

  Node* arc_oi = new_arc(outer_end->a, inner_end->a, edge_at_this_level);
  Node* arc_io = new_arc(inner_end->a, outer_end->a, edge_at_this_level);

  // New root: highest of the surviving nodes. (The old sink may be one
  // of the removed arcs, which survive only as unreachable ghosts.)
  Node* rstar = p.inner_root->higher_than(*p.outer_root) ? p.inner_root : p.outer_root;
  if (p.sink != p.arc1 && p.sink != p.arc2) rstar = p.sink;
  if (arc_oi->higher_than(*rstar)) rstar = arc_oi;
  if (arc_io->higher_than(*rstar)) rstar = arc_io;

  // The unique sink while restructuring: either the old one, or the new
  // root after a single hand-over store.
  Node* top = rstar->higher_than(*p.sink) ? rstar : p.sink;
  if (top == rstar && rstar != p.sink)
    p.sink->parent.store(rstar, std::memory_order_release);
  if (arc_oi != top) arc_oi->parent.store(top, std::memory_order_release);
  if (arc_io != top) arc_io->parent.store(top, std::memory_order_release);

  // Splice: outer = O1 . outer_end . O2, inner rerooted at inner_end.
  std::uint32_t po = tour_position(outer_end, p.outer_root);
  Node *o1, *o2;
  split(p.outer_root, po + 1, o1, o2);
  std::uint32_t pi = tour_position(inner_end, p.inner_root);
  Node *i1, *i2;
  split(p.inner_root, pi, i1, i2);
  Node* rerooted = join(i2, i1);

  Node* t = join(o1, arc_oi);
  t = join(t, rerooted);
  t = join(t, arc_io);
  t = join(t, o2);
  assert(t == rstar);
  if (t->parent.load(std::memory_order_relaxed) != nullptr) {
    // Only possible when the old sink was a removed arc; every vertex
    // already chains through t, so this store changes no partition.
    t->parent.store(nullptr, std::memory_order_release);
  }
  return {arc_oi, arc_io};
}

void EulerTour::cut(Node* arc_uv, Node* arc_vu) {
  PendingCut p = cut_prepare(arc_uv, arc_vu);
  commit_split(p);
}

Node* EulerTour::random_vertex_in(Node* side_root, std::uint64_t rnd) const {
  Node* t = side_root;
  assert(t && t->vertex_count > 0);
  std::uint64_t r = rnd % t->vertex_count;
  while (true) {
    std::uint32_t lc = vertices_of(t->left);
    if (r < lc) {
      t = t->left;
      continue;
    }
    r -= lc;
    if (t->kind == NodeKind::vertex) {
      if (r == 0) return t;
      r -= 1;
    }
    t = t->right;
  }
}

std::vector<const Node*> EulerTour::tour_of(const Node* root) const {
  std::vector<const Node*> out;
  out.reserve(root ? root->tour_size : 0);
  std::vector<std::pair<const Node*, bool>> stack;
  if (root) stack.push_back({root, false});
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (!n) continue;
    if (expanded) {
      out.push_back(n);
      continue;
    }
    stack.push_back({n->right, false});
    stack.push_back({n, true});
    stack.push_back({n->left, false});
  }
  return out;
}

std::string EulerTour::check_component(const Node* root) const {
  std::ostringstream err;
  auto tour = tour_of(root);
  for (const Node* n : tour) {
    if (n->left) {
      if (n->left->parent.load(std::memory_order_relaxed) != n) {
        err << "left child parent mismatch at serial " << n->serial;
        return err.str();
      }
      if (!n->higher_than(*n->left)) {
        err << "heap violation (left) at serial " << n->serial;
        return err.str();
      }
    }
    if (n->right) {
      if (n->right->parent.load(std::memory_order_relaxed) != n) {
        err << "right child parent mismatch at serial " << n->serial;
        return err.str();
      }
      if (!n->higher_than(*n->right)) {
        err << "heap violation (right) at serial " << n->serial;
        return err.str();
      }
    }
    std::uint32_t vc = (n->kind == NodeKind::vertex) ? 1 : 0;
    std::uint32_t ts = 1;
    bool sp = n->spanning_here;
    if (n->left) {
      vc += n->left->vertex_count;
      ts += n->left->tour_size;
      sp = sp || n->left->has_spanning;
    }
    if (n->right) {
      vc += n->right->vertex_count;
      ts += n->right->tour_size;
      sp = sp || n->right->has_spanning;
    }
    if (vc != n->vertex_count || ts != n->tour_size) {
      err << "cached size mismatch at serial " << n->serial;
      return err.str();
    }
    if (sp != n->has_spanning) {
      err << "spanning flag mismatch at serial " << n->serial;
      return err.str();
    }
    // Non-spanning flags may be spuriously true but never falsely false.
    if (!n->has_non_spanning.load(std::memory_order_seq_cst) && wants_non_spanning_flag(n)) {
      err << "non-spanning flag wrongly false at serial " << n->serial;
      return err.str();
    }
  }
  if (tour.empty()) return {};

  // Euler-walk semantics: arcs move the position, vertex nodes must sit
  // at the walk's current vertex, each arc direction appears exactly
  // once and each vertex node exactly once, and the walk closes.
  Vertex pos = tour.front()->a;
  Vertex start = pos;
  std::unordered_map<std::uint64_t, int> arc_seen;
  std::unordered_set<Vertex> vertex_seen;
  for (const Node* n : tour) {
    if (n->kind == NodeKind::vertex) {
      if (n->a != pos) {
        err << "vertex node " << n->a << " out of place (walk at " << pos << ")";
        return err.str();
      }
      if (!vertex_seen.insert(n->a).second) {
        err << "vertex " << n->a << " appears twice";
        return err.str();
      }
    } else {
      if (n->a != pos) {
        err << "arc " << n->a << "->" << n->b << " leaves wrong vertex (walk at " << pos
            << ")";
        return err.str();
      }
      std::uint64_t key = (std::uint64_t(n->a) << 32) | n->b;
      if (++arc_seen[key] > 1) {
        err << "directed arc repeated: " << n->a << "->" << n->b;
        return err.str();
      }
      pos = n->b;
    }
  }
  if (pos != start) {
    err << "tour is not a closed walk";
    return err.str();
  }
  for (auto& [key, cnt] : arc_seen) {
    std::uint64_t rev = (key << 32) | (key >> 32);
    if (!arc_seen.count(rev)) {
      err << "arc " << (key >> 32) << "->" << (key & 0xffffffffu)
          << " lacks its reverse direction";
      return err.str();
    }
  }
  return {};
}

std::vector<Node*> EulerTour::component_roots() const {
  std::unordered_set<Node*> roots;
  std::vector<Node*> out;
  for (std::uint32_t v = 0; v < n_; ++v) {
    Node* r = structural_root(vertex_node(v));
    if (roots.insert(r).second) out.push_back(r);
  }
  return out;
}

}  // namespace dyncon
