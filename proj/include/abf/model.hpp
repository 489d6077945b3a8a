// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>

// Closed-form performance model of a binarized counting Bloom filter.
//
// A counter is Binomial(n, k/m). Binarizing at theta zeroes every counter <= theta,
// so a position is set with probability P1 = Pr(I > theta). The dot product of a
// stored element with the view is modelled as Binomial(k, p_x) and that of an absent
// element as Binomial(k, p_y), where p_y = P1 and p_x = 1 - (m/(n k)) sum_{v<=theta} v Pr(I=v).
// Rates follow by summing the upper tails from the decision threshold T.
namespace abf::model {

enum class CollisionModel {
  kDistinct,         // k distinct indices per element: (1 - k/m)^n
  kWithReplacement,  // independent hashes that may coincide: (1 - 1/m)^(k n)
};

struct ModelPoint {
  std::uint64_t m{};
  std::uint64_t n{};
  std::uint32_t k{};
  std::uint32_t theta{};
  std::uint32_t T{};

  //! Throws std::invalid_argument unless 1 <= k <= m and T <= k.
  void validate() const;
};

struct RateEstimate {
  double p1{};
  double P0{};
  double P1{};
  double dbar_x{};
  double dbar_y{};
  double p_x{};
  double p_y{};
  double tpr{};
  double fpr{};
  double acc{};
};

[[nodiscard]] double binom_pmf(std::uint64_t g, double p, std::int64_t s);
//! Pr(Z >= lo) for Z ~ Binomial(g, p), summed over whichever tail is smaller.
[[nodiscard]] double binom_upper_tail(std::uint64_t g, double p, std::int64_t lo);

[[nodiscard]] double pr_counter(std::uint64_t n, double p1, std::int64_t v);
[[nodiscard]] double p_empty(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                             CollisionModel model = CollisionModel::kDistinct);
[[nodiscard]] double expected_count_histogram(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::int64_t v);

//! (P0, P1) after zeroing every counter <= theta.
[[nodiscard]] std::pair<double, double> p_zero_after_threshold(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                                                               std::uint32_t theta);
[[nodiscard]] double expected_dot_stored(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta);
[[nodiscard]] double expected_dot_absent(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta);
//! (p_x, p_y) clamped to [0, 1].
[[nodiscard]] std::pair<double, double> success_probs(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                                                      std::uint32_t theta);

[[nodiscard]] RateEstimate rates(const ModelPoint& point);

[[nodiscard]] constexpr double accuracy(double tpr, double fpr) noexcept { return (tpr + (1.0 - fpr)) / 2.0; }

//! round((m/n) ln 2), at least 1.
[[nodiscard]] std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n);

}  // namespace abf::model
