#pragma once

#include <cstdint>
#include <string_view>

namespace cyclegan::detail {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

inline uint64_t fnv1a64(std::string_view bytes, uint64_t hash = kFnvOffset) {
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace cyclegan::detail
