#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace floodprio {

// 64-bit FNV-1a. Stable across platforms, used for config hashes and
// snapshot tags in persisted manifests.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value);

}  // namespace floodprio
