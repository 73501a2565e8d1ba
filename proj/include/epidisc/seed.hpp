#pragma once

#include <cstdint>
#include <string_view>

namespace epidisc {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for an independent random stream identified by (root, stage, task).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                                    std::uint64_t task = 0) {
  return mix64(mix64(root ^ fnv1a64(stage)) + task);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t task) {
  return mix64(parent + mix64(task));
}

}  // namespace epidisc
