#pragma once

#include <cstdint>
#include <string_view>

namespace cod {

// FNV-1a, used for deriving per-frame RNG seeds. Deterministic across
// platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::uint64_t seed, std::string_view data) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffULL;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cod
