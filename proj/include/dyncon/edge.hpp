#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

namespace dyncon {

using Vertex = std::uint32_t;

// Undirected edge in canonical form (u < v).
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  Edge() = default;
  Edge(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {
    if (a == b) throw std::invalid_argument("self-loop edge");
  }

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;

  // Nonzero packed key; vertex ids are shifted so that 0 stays reserved
  // for "empty slot" in open-addressed tables.
  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(u) + 1) << 32 |
           (static_cast<std::uint64_t>(v) + 1);
  }
  static Edge from_key(std::uint64_t k) {
    Edge e;
    e.u = static_cast<Vertex>((k >> 32) - 1);
    e.v = static_cast<Vertex>((k & 0xffffffffu) - 1);
    return e;
  }
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const {
    std::uint64_t k = e.key();
    // splitmix64 finalizer
    k ^= k >> 30;
    k *= 0xbf58476d1ce4e5b9ull;
    k ^= k >> 27;
    k *= 0x94d049bb133111ebull;
    k ^= k >> 31;
    return static_cast<std::size_t>(k);
  }
};

}  // namespace dyncon
