// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace abf {

struct Hash128 {
  std::uint64_t low{};
  std::uint64_t high{};

  friend bool operator==(const Hash128&, const Hash128&) = default;
};

//! MurmurHash3 x64_128 keyed by a 64-bit seed (both lanes start from the seed).
[[nodiscard]] Hash128 murmur3_128(std::span<const std::byte> data, std::uint64_t seed) noexcept;

//! SplitMix64 finalizer; a bijection on 64-bit values.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace abf
