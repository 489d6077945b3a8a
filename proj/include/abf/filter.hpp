// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abf {

//! Base for failures caused by the filter's state rather than by bad arguments.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public DomainError {
 public:
  explicit OverflowError(const std::string& what) : DomainError("overflow: " + what) {}
};

class UnderflowError : public DomainError {
 public:
  explicit UnderflowError(const std::string& what) : DomainError("underflow: " + what) {}
};

inline constexpr std::uint32_t kDefaultCounterMax = 65535;

struct FilterParams {
  std::uint64_t m{};
  std::uint32_t k{};
  std::uint64_t seed{};
  std::uint32_t counter_max = kDefaultCounterMax;

  //! Throws std::invalid_argument unless 1 <= k <= m <= 2^32 and counter_max >= 1.
  void validate() const;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

//! The k distinct filter positions one element maps to (its individual Bloom filter).
class ElementDigest {
 public:
  ElementDigest() = default;

  //! Wraps explicit indices; throws std::invalid_argument unless there are exactly
  //! k of them, all distinct and in [0, m).
  static ElementDigest from_indices(const FilterParams& params, std::vector<std::uint32_t> indices);

  [[nodiscard]] std::span<const std::uint32_t> indices() const noexcept { return indices_; }
  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }

  friend bool operator==(const ElementDigest&, const ElementDigest&) = default;

 private:
  friend ElementDigest digest(std::span<const std::byte>, const FilterParams&);
  explicit ElementDigest(std::vector<std::uint32_t> indices) noexcept : indices_(std::move(indices)) {}

  std::vector<std::uint32_t> indices_;
};

// Enhanced double hashing over one 128-bit hash; candidates already taken are
// moved forward by one position (mod m) until free, so all k indices differ.
[[nodiscard]] ElementDigest digest(std::span<const std::byte> element, const FilterParams& params);
[[nodiscard]] ElementDigest digest(std::string_view element, const FilterParams& params);

class AbfView;

//! Counting Bloom filter: m saturating counters plus the number of stored insertions.
//! Single writer; readers should take an AbfView snapshot.
class CountingFilter {
 public:
  explicit CountingFilter(const FilterParams& params);

  //! Restores a filter from raw state, checking every invariant (used by deserialization).
  static CountingFilter from_state(const FilterParams& params, std::vector<std::uint32_t> counters,
                                   std::uint64_t n_stored);

  //! Atomic: throws OverflowError and leaves the filter untouched if any target counter
  //! is already at counter_max.
  void insert(const ElementDigest& d);
  //! Atomic: throws UnderflowError if n_stored is 0 or any target counter is 0.
  void remove(const ElementDigest& d);

  [[nodiscard]] const FilterParams& params() const noexcept { return params_; }
  [[nodiscard]] std::span<const std::uint32_t> counters() const noexcept { return counters_; }
  [[nodiscard]] std::uint64_t n_stored() const noexcept { return n_stored_; }

  friend bool operator==(const CountingFilter&, const CountingFilter&) = default;

 private:
  void check_digest(const ElementDigest& d) const;

  FilterParams params_;
  std::vector<std::uint32_t> counters_;
  std::uint64_t n_stored_ = 0;
};

//! Immutable binary snapshot [counter > theta] with a decision threshold T.
//! theta = 0 is the standard Bloom filter.
class AbfView {
 public:
  [[nodiscard]] std::uint32_t theta() const noexcept { return theta_; }
  [[nodiscard]] std::uint32_t decision_threshold() const noexcept { return decision_threshold_; }
  [[nodiscard]] const FilterParams& params() const noexcept { return params_; }
  [[nodiscard]] std::uint64_t n_at_snapshot() const noexcept { return n_at_snapshot_; }

  [[nodiscard]] bool bit(std::size_t i) const noexcept { return ((words_[i >> 6] >> (i & 63)) & 1U) != 0; }
  [[nodiscard]] std::size_t popcount() const noexcept;
  [[nodiscard]] std::vector<bool> bits() const;

  //! Number of the digest's positions that are set, in [0, k].
  [[nodiscard]] std::uint32_t dot(const ElementDigest& d) const noexcept;
  //! Membership: dot >= T.
  [[nodiscard]] bool query(const ElementDigest& d) const noexcept { return dot(d) >= decision_threshold_; }

  //! Same bits, different decision threshold. Throws std::invalid_argument if T > k.
  [[nodiscard]] AbfView with_decision_threshold(std::uint32_t decision_threshold) const;
  //! Copy with the given positions cleared (retouched filters).
  [[nodiscard]] AbfView with_cleared(std::span<const std::size_t> positions) const;

  friend bool operator==(const AbfView&, const AbfView&) = default;

 private:
  friend AbfView binarize(const CountingFilter&, std::uint32_t, std::uint32_t);
  AbfView() = default;

  std::vector<std::uint64_t> words_;
  std::uint32_t theta_ = 0;
  std::uint32_t decision_threshold_ = 0;
  FilterParams params_;
  std::uint64_t n_at_snapshot_ = 0;
};

//! Throws std::invalid_argument if decision_threshold > k.
[[nodiscard]] AbfView binarize(const CountingFilter& filter, std::uint32_t theta,
                               std::uint32_t decision_threshold);

[[nodiscard]] inline std::uint32_t dot(const AbfView& view, const ElementDigest& d) noexcept {
  return view.dot(d);
}
[[nodiscard]] inline bool query(const AbfView& view, const ElementDigest& d) noexcept {
  return view.query(d);
}

}  // namespace abf
