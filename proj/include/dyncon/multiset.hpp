#pragma once

#include <atomic>
#include <cstdint>

#include "dyncon/edge.hpp"
#include "dyncon/reclaim.hpp"

namespace dyncon {

// Lock-free multiset of edges: push-front bag with logically-deleted
// marks (bit 0 of the next pointer) and physical unlinking during
// traversal. Iteration is weakly consistent: every element that is
// present for the whole traversal is visited at least once.
//
// Callers are expected to hold a reclaim::Guard across traversals.
class EdgeMultiset {
  struct Entry {
    Edge value;
    std::atomic<std::uintptr_t> next;  // pointer | dead-mark in bit 0
    explicit Entry(Edge e) : value(e), next(0) {}
  };

  static Entry* ptr_of(std::uintptr_t w) {
    return reinterpret_cast<Entry*>(w & ~std::uintptr_t(1));
  }
  static bool marked(std::uintptr_t w) { return w & 1; }

 public:
  EdgeMultiset() = default;
  EdgeMultiset(const EdgeMultiset&) = delete;
  EdgeMultiset& operator=(const EdgeMultiset&) = delete;

  ~EdgeMultiset() {
    Entry* e = head_.load(std::memory_order_relaxed);
    while (e) {
      Entry* n = ptr_of(e->next.load(std::memory_order_relaxed));
      delete e;
      e = n;
    }
  }

  void add(Edge e) {
    Entry* n = new Entry(e);
    count_.fetch_add(1, std::memory_order_seq_cst);
    Entry* h = head_.load(std::memory_order_acquire);
    do {
      n->next.store(reinterpret_cast<std::uintptr_t>(h), std::memory_order_relaxed);
    } while (!head_.compare_exchange_weak(h, n, std::memory_order_seq_cst,
                                          std::memory_order_acquire));
  }

  // Removes one live copy equal to e; false if none present.
  bool remove_one(Edge e) {
    Entry* pred = nullptr;
    Entry* cur = head_.load(std::memory_order_acquire);
    while (cur) {
      std::uintptr_t w = cur->next.load(std::memory_order_acquire);
      if (!marked(w) && cur->value == e) {
        if (cur->next.compare_exchange_strong(w, w | 1, std::memory_order_seq_cst)) {
          count_.fetch_sub(1, std::memory_order_seq_cst);
          unlink(pred, cur, ptr_of(w));
          return true;
        }
        continue;  // next word changed under us; re-examine cur
      }
      if (marked(w)) {
        if (unlink(pred, cur, ptr_of(w))) {
          cur = ptr_of(w);
          continue;
        }
      } else {
        pred = cur;
      }
      cur = ptr_of(w);
    }
    return false;
  }

  bool maybe_nonempty() const {
    return count_.load(std::memory_order_seq_cst) > 0;
  }

  std::size_t approx_size() const {
    auto c = count_.load(std::memory_order_seq_cst);
    return c > 0 ? static_cast<std::size_t>(c) : 0;
  }

  // Weakly consistent forward iteration over live entries.
  class Iterator {
   public:
    explicit Iterator(const EdgeMultiset* s) : set_(s) {
      cur_ = s->head_.load(std::memory_order_acquire);
      skip_dead();
    }
    bool valid() const { return cur_ != nullptr; }
    Edge value() const { return cur_->value; }
    void next() {
      cur_ = ptr_of(cur_->next.load(std::memory_order_acquire));
      skip_dead();
    }

   private:
    void skip_dead() {
      while (cur_) {
        std::uintptr_t w = cur_->next.load(std::memory_order_acquire);
        if (!marked(w)) return;
        cur_ = ptr_of(w);
      }
    }
    const EdgeMultiset* set_;
    Entry* cur_;
  };

  Iterator iterate() const { return Iterator(this); }

  // k-th live entry (clamped); false when empty. Used by the sampling
  // fast path; approximate by construction.
  bool nth(std::uint64_t k, Edge& out) const {
    Edge last{};
    bool any = false;
    std::uint64_t i = 0;
    for (Iterator it(this); it.valid(); it.next()) {
      last = it.value();
      any = true;
      if (i++ == k) {
        out = last;
        return true;
      }
    }
    if (any) out = last;
    return any;
  }

 private:
  // Detach cur (marked) from the chain; retire on success.
  bool unlink(Entry* pred, Entry* cur, Entry* nxt) {
    std::uintptr_t expected = reinterpret_cast<std::uintptr_t>(cur);
    bool ok;
    if (pred) {
      ok = pred->next.compare_exchange_strong(expected,
                                              reinterpret_cast<std::uintptr_t>(nxt),
                                              std::memory_order_seq_cst);
    } else {
      Entry* e = cur;
      ok = head_.compare_exchange_strong(e, nxt, std::memory_order_seq_cst);
    }
    if (ok) reclaim::retire(cur);
    return ok;
  }

  std::atomic<Entry*> head_{nullptr};
  std::atomic<std::int64_t> count_{0};
};

}  // namespace dyncon
