// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "abf/filter.hpp"

namespace abf {

//! Raised for malformed or truncated filter files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kFormatVersion = 1;

// Layout, all little-endian:
//   "ABF1" | version u8 | m u64 | k u32 | seed u64 | counter_max u32 | n_stored u64 | m x counter u32
[[nodiscard]] std::vector<std::byte> serialize(const CountingFilter& filter);
[[nodiscard]] CountingFilter deserialize(std::span<const std::byte> bytes);

[[nodiscard]] CountingFilter load_filter(const std::filesystem::path& path);
//! Writes to a sibling temporary file and renames it over `path`.
void save_filter_atomic(const CountingFilter& filter, const std::filesystem::path& path);

}  // namespace abf
