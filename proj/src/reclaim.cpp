#include "dyncon/reclaim.hpp"

#include <array>
#include <mutex>
#include <vector>

namespace dyncon::reclaim {
namespace {

struct alignas(64) Slot {
  std::atomic<std::uint64_t> epoch{0};  // 0 = not pinned
  std::atomic<bool> used{false};
};

struct Retired {
  void* ptr;
  void (*deleter)(void*);
  std::uint64_t tag;
};

std::array<Slot, kMaxThreads> g_slots;
std::atomic<std::uint64_t> g_epoch{2};
std::atomic<std::size_t> g_backlog{0};

std::mutex g_orphan_mu;
std::vector<Retired> g_orphans;

std::uint64_t min_pinned_epoch() {
  std::uint64_t m = ~0ull;
  for (const Slot& s : g_slots) {
    std::uint64_t e = s.epoch.load(std::memory_order_seq_cst);
    if (e != 0 && e < m) m = e;
  }
  return m;
}

void try_advance() {
  std::uint64_t g = g_epoch.load(std::memory_order_seq_cst);
  for (const Slot& s : g_slots) {
    std::uint64_t e = s.epoch.load(std::memory_order_seq_cst);
    if (e != 0 && e != g) return;
  }
  g_epoch.compare_exchange_strong(g, g + 1, std::memory_order_seq_cst);
}

bool reclaimable(std::uint64_t tag, std::uint64_t global, std::uint64_t min_pin) {
  return tag + 2 <= global && tag < min_pin;
}

struct ThreadState {
  Slot* slot = nullptr;
  std::size_t index = 0;
  std::uint32_t pin_depth = 0;
  std::uint32_t retire_count = 0;
  std::vector<Retired> retired;

  ThreadState() {
    for (std::size_t i = 0; i < kMaxThreads; ++i) {
      bool expected = false;
      if (g_slots[i].used.compare_exchange_strong(expected, true)) {
        slot = &g_slots[i];
        index = i;
        return;
      }
    }
    std::terminate();  // more threads than kMaxThreads
  }

  void scan() {
    try_advance();
    std::uint64_t g = g_epoch.load(std::memory_order_seq_cst);
    std::uint64_t mp = min_pinned_epoch();
    std::size_t kept = 0;
    for (Retired& r : retired) {
      if (reclaimable(r.tag, g, mp)) {
        r.deleter(r.ptr);
        g_backlog.fetch_sub(1, std::memory_order_relaxed);
      } else {
        retired[kept++] = r;
      }
    }
    retired.resize(kept);
    if (retired.empty() && !g_orphans.empty()) {
      // Adopt orphaned retirements left by exited threads.
      std::lock_guard<std::mutex> lk(g_orphan_mu);
      retired.swap(g_orphans);
    }
  }

  ~ThreadState() {
    if (!retired.empty()) {
      std::lock_guard<std::mutex> lk(g_orphan_mu);
      for (Retired& r : retired) g_orphans.push_back(r);
    }
    slot->epoch.store(0, std::memory_order_seq_cst);
    slot->used.store(false, std::memory_order_seq_cst);
  }
};

ThreadState& tls() {
  thread_local ThreadState state;
  return state;
}

}  // namespace

std::size_t thread_index() { return tls().index; }

void retire(void* p, void (*deleter)(void*)) {
  ThreadState& t = tls();
  std::uint64_t tag = g_epoch.load(std::memory_order_seq_cst);
  t.retired.push_back(Retired{p, deleter, tag});
  g_backlog.fetch_add(1, std::memory_order_relaxed);
  if (++t.retire_count % 64 == 0) t.scan();
}

Guard::Guard() {
  ThreadState& t = tls();
  if (t.pin_depth++ == 0) {
    Slot& s = *t.slot;
    std::uint64_t e;
    do {
      e = g_epoch.load(std::memory_order_seq_cst);
      s.epoch.store(e, std::memory_order_seq_cst);
    } while (g_epoch.load(std::memory_order_seq_cst) != e);
  }
}

Guard::~Guard() {
  ThreadState& t = tls();
  if (--t.pin_depth == 0) {
    t.slot->epoch.store(0, std::memory_order_seq_cst);
  }
}

void drain_for_tests() {
  ThreadState& t = tls();
  for (int i = 0; i < 8; ++i) {
    t.scan();
    if (t.retired.empty()) break;
  }
}

std::size_t retired_backlog() { return g_backlog.load(std::memory_order_relaxed); }

}  // namespace dyncon::reclaim
