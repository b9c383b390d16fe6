#pragma once

// Test-only instrumentation points. Compiled out entirely unless
// DYNCON_ENABLE_HOOKS is defined (a separate library target provides
// that build for the scripted-interleaving suites).

#ifdef DYNCON_ENABLE_HOOKS
#include <atomic>
#endif

namespace dyncon::hooks {

enum class Point {
  // reader (find_root)
  read_parent,        // a = node just inspected, b = parent observed (may be null)
  read_version,       // a = root about to have its version read
  // non-blocking adder
  add_info_published,  // a = edge key (as pointer-sized value)
  add_read_removal,    // a = removal op observed (may be null)
  // spanning removal
  removal_published,
  pending_cut_ready,   // cut marker stored
  level_scanned,       // one level's search finished
  slot_finalized,
  before_unlink,
  removal_cleared,
};

#ifdef DYNCON_ENABLE_HOOKS

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reached(Point p, const void* a, const void* b) = 0;
};

inline std::atomic<Controller*> g_controller{nullptr};

// Deliberately mis-wired writer used by the mutation-detection test:
// when set, root version bumps are skipped.
inline std::atomic<bool> g_fault_skip_version_bump{false};

inline void emit(Point p, const void* a = nullptr, const void* b = nullptr) {
  Controller* c = g_controller.load(std::memory_order_acquire);
  if (c) c->reached(p, a, b);
}

inline bool fault_skip_version_bump() {
  return g_fault_skip_version_bump.load(std::memory_order_relaxed);
}

#else

inline void emit(Point, const void* = nullptr, const void* = nullptr) {}
inline constexpr bool fault_skip_version_bump() { return false; }

#endif

}  // namespace dyncon::hooks
