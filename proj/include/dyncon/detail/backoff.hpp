#pragma once

#include <cstdint>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace dyncon::detail {

// Retry helper for lock-free loops: spin freely for the first 64
// failures, then back off exponentially (bounded).
class Backoff {
 public:
  void pause() {
    ++failures_;
    if (failures_ <= kFreeSpins) {
      cpu_relax();
      return;
    }
    std::uint32_t spins = current_;
    for (std::uint32_t i = 0; i < spins; ++i) cpu_relax();
    if (current_ < kMaxSpins) current_ *= 2;
    if (spins >= kMaxSpins) std::this_thread::yield();
  }

 private:
  static constexpr std::uint32_t kFreeSpins = 64;
  static constexpr std::uint32_t kMaxSpins = 1024;

  static void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#else
    std::this_thread::yield();
#endif
  }

  std::uint32_t failures_ = 0;
  std::uint32_t current_ = 1;
};

}  // namespace dyncon::detail
