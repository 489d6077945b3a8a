// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abf/filter.hpp"
#include "abf/model.hpp"

namespace abf::harness {

// ---------------------------------------------------------------------------
// Element streams
//
// Element i of a stream is mix64(key + i) encoded as 8 little-endian bytes.
// mix64 is a bijection, so distinct i give distinct elements. Stored elements
// use i in [0, n) and absent ones start at kAbsentOffset.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kAbsentOffset = std::uint64_t{1} << 40;

[[nodiscard]] std::uint64_t element_value(std::uint64_t key, std::uint64_t i) noexcept;
[[nodiscard]] std::array<std::byte, 8> element_bytes(std::uint64_t value) noexcept;
//! Digests of elements [first, first + count) of the stream.
[[nodiscard]] std::vector<ElementDigest> stream_digests(const FilterParams& params, std::uint64_t key,
                                                        std::uint64_t first, std::uint64_t count);

//! Per-trial seeds derived from a base seed.
struct TrialSeeds {
  std::uint64_t hash_seed{};
  std::uint64_t element_key{};
  std::uint64_t erase_seed{};
};
[[nodiscard]] TrialSeeds trial_seeds(std::uint64_t base_seed, std::uint64_t trial) noexcept;

// ---------------------------------------------------------------------------
// Empirical rates
// ---------------------------------------------------------------------------

struct EmpiricalRates {
  double tpr{};
  double fpr{};
};

//! Fraction of stored / absent digests the view accepts. Throws std::invalid_argument
//! if `stored` is empty; with no absent digests fpr is 0.
[[nodiscard]] EmpiricalRates measure_view(const AbfView& view, std::span<const ElementDigest> stored,
                                          std::span<const ElementDigest> absent);

//! Builds a counting filter from `stored`, binarizes at (theta, T) and measures it.
[[nodiscard]] EmpiricalRates measure_empirical_rates(const FilterParams& params,
                                                     std::span<const ElementDigest> stored,
                                                     std::span<const ElementDigest> absent, std::uint32_t theta,
                                                     std::uint32_t T);

//! Retouched Bloom filter: clears round(erase_fraction * set bits) uniformly chosen
//! set bits of a theta = 0 view; the decision threshold is k.
[[nodiscard]] AbfView retouched_bf(const AbfView& view, double erase_fraction, std::uint64_t rng_seed);

//! Model-side approximation of a retouched filter's rates at (m, n, k).
[[nodiscard]] EmpiricalRates retouched_analytic(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                                                double erase_fraction);

// ---------------------------------------------------------------------------
// Brute-force oracle for tiny instances
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kOracleMaxM = 64;
inline constexpr std::size_t kOracleMaxUniverse = 4096;

struct OracleRates {
  double tpr{};
  std::optional<double> fpr;  // empty when every universe element is stored
};

//! Evaluates every universe element against [sum of one-hot vectors > theta] with
//! dense vector arithmetic. `universe` holds each element's positions; `stored`
//! indexes into it (no repeats). Throws std::invalid_argument for oversized or
//! malformed input.
[[nodiscard]] OracleRates brute_force_oracle(std::uint64_t m, std::span<const std::vector<std::uint32_t>> universe,
                                             std::span<const std::size_t> stored, std::uint32_t theta,
                                             std::uint32_t T);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class FilterKind : std::uint8_t { kAbf, kOptimizedBf, kNonoptimizedBf, kRetouchedBf };

[[nodiscard]] std::string_view to_string(FilterKind kind) noexcept;

struct TrialRecord {
  std::uint64_t n{};
  std::uint32_t k{};
  FilterKind filter_kind = FilterKind::kAbf;
  std::uint32_t theta{};
  std::uint32_t T{};
  double empirical_tpr{};
  double empirical_fpr{};
  double empirical_acc{};
  double analytic_tpr{};
  double analytic_fpr{};
  double analytic_acc{};
  bool rebuild_flag = false;
};

struct ThresholdSweepConfig {
  std::uint64_t m = 10000;
  std::uint64_t n = 500;
  std::uint32_t k = 100;
  std::uint32_t theta_max = 5;
  double l_tpr = 0.97;
  std::uint64_t query_count = 10000;
  std::uint32_t trials = 10;
  std::uint64_t base_seed = 1;

  void validate() const;
};

struct ThresholdRow {
  std::uint32_t theta{};
  std::uint32_t T{};
  model::RateEstimate analytic;
  double empirical_tpr{};
  double empirical_fpr{};
  double empirical_acc{};
  double mean_dot_stored{};
  double mean_dot_absent{};
  std::vector<double> pmf_stored;   // Binomial(k, p_x), d = 0..k
  std::vector<double> pmf_absent;   // Binomial(k, p_y)
  std::vector<double> freq_stored;  // empirical dot frequencies, all trials pooled
  std::vector<double> freq_absent;
};

struct ThresholdSweepResult {
  ThresholdSweepConfig config;
  std::vector<ThresholdRow> rows;
  std::uint32_t best_theta{};  // highest analytic ACC, ties to smaller theta

  [[nodiscard]] std::vector<TrialRecord> records() const;
};

[[nodiscard]] ThresholdSweepResult run_threshold_sweep(const ThresholdSweepConfig& config);

struct GrowthConfig {
  std::uint64_t m = 10000;
  std::uint32_t k = 100;
  std::uint64_t n_start = 50;
  std::uint64_t n_stop = 5000;
  std::uint64_t n_step = 50;
  double l_tpr = 0.9;
  double erase_fraction = 0.001;
  std::uint64_t query_count = 10000;
  std::uint32_t trials = 10;
  std::uint64_t base_seed = 1;

  void validate() const;
  [[nodiscard]] std::vector<std::uint64_t> n_values() const;
};

struct GrowthResult {
  GrowthConfig config;
  std::vector<TrialRecord> records;  // sorted by (n, filter_kind), rates averaged over trials
  std::size_t rebuild_count{};       // optimized-k constructions including the first

  [[nodiscard]] const TrialRecord& at(std::uint64_t n, FilterKind kind) const;
};

[[nodiscard]] GrowthResult run_growth_comparison(const GrowthConfig& config);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "n,k,filter_kind,theta,T,tpr_emp,fpr_emp,acc_emp,tpr_ana,fpr_ana,acc_ana,rebuild";

void write_csv(std::ostream& out, std::span<const TrialRecord> records);
//! theta,d,pmf_stored,pmf_absent,freq_stored,freq_absent
void write_pmf_csv(std::ostream& out, const ThresholdSweepResult& result);

}  // namespace abf::harness
