#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace dyncon::reclaim {

// Epoch-based deferred reclamation. Readers pin the current epoch for
// the duration of a traversal; retired objects are freed once the
// global epoch has advanced twice past their retirement epoch, which
// cannot happen while any reader that might still hold a reference is
// pinned.
//
// The registry is process-global and shared by all structures.

inline constexpr std::size_t kMaxThreads = 256;

// Index of the calling thread's registry slot, stable for the thread's
// lifetime. Also used by engines to keep per-thread statistics.
std::size_t thread_index();

void retire(void* p, void (*deleter)(void*));

template <class T>
void retire(T* p) {
  retire(p, [](void* q) { delete static_cast<T*>(q); });
}

// Pins the current epoch; reentrant.
class Guard {
 public:
  Guard();
  ~Guard();
  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;
};

// Force reclamation attempts until the retired backlog drains or no
// progress is possible (some thread still pinned). Test helper.
void drain_for_tests();

// Number of objects currently awaiting reclamation (approximate).
std::size_t retired_backlog();

}  // namespace dyncon::reclaim
