#pragma once

#include <cstdint>

namespace polyflex {

// Deterministic RNG helpers. Everything here is pinned arithmetic so results
// are identical across platforms, standard libraries and thread counts.

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53; // [0, 1)
}

// Counter-based stream: the value at (seed, index, axis) does not depend on
// call order, which makes sample ranges partitionable across workers.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t axis) {
  std::uint64_t s = mix64(seed ^ 0x9E3779B97F4A7C15ull);
  s = mix64(s + 0x9E3779B97F4A7C15ull * (index + 1));
  s = mix64(s + 0xC2B2AE3D27D4EB4Full * (axis + 1));
  return unit_from_bits(s);
}

// Derive an independent stream seed, e.g. one per load in a population.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t key) {
  return mix64(mix64(seed ^ 0xD6E8FEB86659FD93ull) + key);
}

// Sequential splitmix chain; the draw order of callers is part of their
// documented contract.
class DrawChain {
 public:
  explicit DrawChain(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_bits() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_from_bits(next_bits()); }

 private:
  std::uint64_t state_;
};

} // namespace polyflex
