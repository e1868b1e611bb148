#pragma once

#include <cstdint>

namespace qdgd {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(mix64(seed) ^ (salt * 0xd1b54a32d192ed03ULL));
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform stream for one agent. The draw for (round, coordinate)
/// depends only on the key, never on how many draws were made before it.
class KeyedStream {
 public:
  constexpr KeyedStream(std::uint64_t seed, std::uint64_t agent)
      : key_(derive_seed(seed, agent + 1)), agent_(agent) {}

  constexpr double uniform(std::uint64_t round, std::uint64_t coordinate) const {
    std::uint64_t h = mix64(key_ ^ mix64(round));
    h = mix64(h ^ (coordinate * 0x9e3779b97f4a7c15ULL));
    return to_unit(h);
  }

  constexpr std::uint64_t agent() const { return agent_; }

 private:
  std::uint64_t key_;
  std::uint64_t agent_;
};

}  // namespace qdgd
