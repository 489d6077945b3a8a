// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "abf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "abf/hash.hpp"
#include "abf/tuner.hpp"

namespace abf::harness {

namespace {

// Multiply-shift bounded draw; identical across standard libraries, unlike
// std::uniform_int_distribution.
__extension__ using Uint128 = unsigned __int128;

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<Uint128>(rng()) * bound) >> 64);
}

double fraction(std::uint64_t hits, std::uint64_t total) {
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::uint64_t element_value(std::uint64_t key, std::uint64_t i) noexcept { return mix64(key + i); }

std::array<std::byte, 8> element_bytes(std::uint64_t value) noexcept {
  std::array<std::byte, 8> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xFF);
  }
  return out;
}

std::vector<ElementDigest> stream_digests(const FilterParams& params, std::uint64_t key, std::uint64_t first,
                                          std::uint64_t count) {
  std::vector<ElementDigest> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto bytes = element_bytes(element_value(key, first + i));
    out.push_back(digest(std::span<const std::byte>(bytes), params));
  }
  return out;
}

TrialSeeds trial_seeds(std::uint64_t base_seed, std::uint64_t trial) noexcept {
  const std::uint64_t t = mix64(base_seed ^ mix64(trial + 0x5EED));
  return {mix64(t ^ 0x48415348ULL), mix64(t ^ 0x454C454DULL), mix64(t ^ 0x45524153ULL)};
}

EmpiricalRates measure_view(const AbfView& view, std::span<const ElementDigest> stored,
                            std::span<const ElementDigest> absent) {
  if (stored.empty()) {
    throw std::invalid_argument("measure_view needs at least one stored element");
  }
  std::uint64_t tp = 0;
  for (const auto& d : stored) {
    tp += view.query(d) ? 1 : 0;
  }
  std::uint64_t fp = 0;
  for (const auto& d : absent) {
    fp += view.query(d) ? 1 : 0;
  }
  return {fraction(tp, stored.size()), fraction(fp, absent.size())};
}

EmpiricalRates measure_empirical_rates(const FilterParams& params, std::span<const ElementDigest> stored,
                                       std::span<const ElementDigest> absent, std::uint32_t theta,
                                       std::uint32_t T) {
  CountingFilter filter(params);
  for (const auto& d : stored) {
    filter.insert(d);
  }
  return measure_view(binarize(filter, theta, T), stored, absent);
}

AbfView retouched_bf(const AbfView& view, double erase_fraction, std::uint64_t rng_seed) {
  if (!(erase_fraction >= 0.0 && erase_fraction <= 1.0)) {
    throw std::invalid_argument("erase_fraction must be in [0, 1]");
  }
  if (view.theta() != 0) {
    throw std::invalid_argument("retouching applies to a theta = 0 view");
  }
  std::vector<std::size_t> set_positions;
  set_positions.reserve(view.popcount());
  for (std::size_t i = 0; i < view.params().m; ++i) {
    if (view.bit(i)) {
      set_positions.push_back(i);
    }
  }
  const auto erase =
      static_cast<std::size_t>(std::llround(erase_fraction * static_cast<double>(set_positions.size())));
  // Partial Fisher-Yates: the first `erase` slots become a uniform sample.
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = 0; i < erase; ++i) {
    const std::size_t j = i + bounded(rng, set_positions.size() - i);
    std::swap(set_positions[i], set_positions[j]);
  }
  return view.with_cleared(std::span(set_positions).first(erase)).with_decision_threshold(view.params().k);
}

EmpiricalRates retouched_analytic(std::uint64_t m, std::uint64_t n, std::uint32_t k, double erase_fraction) {
  const double md = static_cast<double>(m);
  const double set_fraction = 1.0 - model::p_empty(m, n, k);
  const double set_bits = set_fraction * md;
  const double erased = std::round(erase_fraction * set_bits);
  const double kd = static_cast<double>(k);
  const double tpr = set_bits > 0.0 ? std::pow(std::max(0.0, 1.0 - erased / set_bits), kd) : 0.0;
  const double fpr = std::pow(std::max(0.0, set_fraction - erased / md), kd);
  return {tpr, fpr};
}

OracleRates brute_force_oracle(std::uint64_t m, std::span<const std::vector<std::uint32_t>> universe,
                               std::span<const std::size_t> stored, std::uint32_t theta, std::uint32_t T) {
  if (m == 0 || m > kOracleMaxM) {
    throw std::invalid_argument("oracle supports 1 <= m <= 64");
  }
  if (universe.size() > kOracleMaxUniverse) {
    throw std::invalid_argument("oracle universe too large to enumerate");
  }
  if (stored.empty()) {
    throw std::invalid_argument("oracle needs at least one stored element");
  }

  // One-hot (individual filter) vector for every universe element.
  std::vector<std::vector<int>> vectors;
  vectors.reserve(universe.size());
  for (const auto& positions : universe) {
    std::vector<int> v(m, 0);
    for (std::uint32_t p : positions) {
      if (p >= m || v[p] != 0) {
        throw std::invalid_argument("oracle element positions must be distinct and < m");
      }
      v[p] = 1;
    }
    vectors.push_back(std::move(v));
  }

  std::vector<bool> is_stored(universe.size(), false);
  std::vector<int> sum(m, 0);
  for (std::size_t idx : stored) {
    if (idx >= universe.size() || is_stored[idx]) {
      throw std::invalid_argument("stored indices must be distinct universe positions");
    }
    is_stored[idx] = true;
    for (std::size_t i = 0; i < m; ++i) {
      sum[i] += vectors[idx][i];
    }
  }
  std::vector<int> binary(m);
  for (std::size_t i = 0; i < m; ++i) {
    binary[i] = sum[i] > static_cast<int>(theta) ? 1 : 0;
  }

  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t negatives = 0;
  for (std::size_t e = 0; e < universe.size(); ++e) {
    int d = 0;
    for (std::size_t i = 0; i < m; ++i) {
      d += binary[i] * vectors[e][i];
    }
    const bool accepted = d >= static_cast<int>(T);
    if (is_stored[e]) {
      tp += accepted ? 1 : 0;
    } else {
      ++negatives;
      fp += accepted ? 1 : 0;
    }
  }
  OracleRates out;
  out.tpr = fraction(tp, stored.size());
  if (negatives > 0) {
    out.fpr = fraction(fp, negatives);
  }
  return out;
}

std::string_view to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::kAbf:
      return "abf";
    case FilterKind::kOptimizedBf:
      return "optimized_bf";
    case FilterKind::kNonoptimizedBf:
      return "nonoptimized_bf";
    case FilterKind::kRetouchedBf:
      return "retouched_bf";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Threshold sweep
// ---------------------------------------------------------------------------

void ThresholdSweepConfig::validate() const {
  FilterParams{m, k, 0}.validate();
  if (n == 0 || query_count == 0 || trials == 0) {
    throw std::invalid_argument("n, query_count and trials must be >= 1");
  }
  tune::TuneConstraint{l_tpr}.validate();
}

std::vector<TrialRecord> ThresholdSweepResult::records() const {
  std::vector<TrialRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back({config.n, config.k, FilterKind::kAbf, row.theta, row.T, row.empirical_tpr, row.empirical_fpr,
                   row.empirical_acc, row.analytic.tpr, row.analytic.fpr, row.analytic.acc, false});
  }
  return out;
}

ThresholdSweepResult run_threshold_sweep(const ThresholdSweepConfig& config) {
  config.validate();
  const std::uint32_t k = config.k;
  ThresholdSweepResult result;
  result.config = config;

  for (std::uint32_t theta = 0; theta <= config.theta_max; ++theta) {
    const auto tuned = tune::optimize_T(config.m, config.n, k, theta, {config.l_tpr});
    ThresholdRow row;
    row.theta = theta;
    row.T = tuned.T;
    row.analytic = tuned.predicted;
    row.pmf_stored.resize(k + 1);
    row.pmf_absent.resize(k + 1);
    for (std::uint32_t d = 0; d <= k; ++d) {
      row.pmf_stored[d] = model::binom_pmf(k, row.analytic.p_x, d);
      row.pmf_absent[d] = model::binom_pmf(k, row.analytic.p_y, d);
    }
    row.freq_stored.assign(k + 1, 0.0);
    row.freq_absent.assign(k + 1, 0.0);
    result.rows.push_back(std::move(row));
  }

  for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
    const auto seeds = trial_seeds(config.base_seed, trial);
    const FilterParams params{config.m, k, seeds.hash_seed};
    const auto stored = stream_digests(params, seeds.element_key, 0, config.n);
    const auto absent = stream_digests(params, seeds.element_key, kAbsentOffset, config.query_count);
    CountingFilter filter(params);
    for (const auto& d : stored) {
      filter.insert(d);
    }
    for (auto& row : result.rows) {
      const auto view = binarize(filter, row.theta, row.T);
      std::uint64_t tp = 0;
      std::uint64_t fp = 0;
      for (const auto& d : stored) {
        const auto dot = view.dot(d);
        row.freq_stored[dot] += 1.0;
        tp += dot >= row.T ? 1 : 0;
      }
      for (const auto& d : absent) {
        const auto dot = view.dot(d);
        row.freq_absent[dot] += 1.0;
        fp += dot >= row.T ? 1 : 0;
      }
      row.empirical_tpr += fraction(tp, stored.size());
      row.empirical_fpr += fraction(fp, absent.size());
    }
  }

  const double trials = config.trials;
  const double stored_total = trials * static_cast<double>(config.n);
  const double absent_total = trials * static_cast<double>(config.query_count);
  for (auto& row : result.rows) {
    row.empirical_tpr /= trials;
    row.empirical_fpr /= trials;
    row.empirical_acc = model::accuracy(row.empirical_tpr, row.empirical_fpr);
    for (std::uint32_t d = 0; d <= k; ++d) {
      row.mean_dot_stored += d * row.freq_stored[d];
      row.mean_dot_absent += d * row.freq_absent[d];
      row.freq_stored[d] /= stored_total;
      row.freq_absent[d] /= absent_total;
    }
    row.mean_dot_stored /= stored_total;
    row.mean_dot_absent /= absent_total;
  }

  result.best_theta = result.rows.front().theta;
  double best_acc = result.rows.front().analytic.acc;
  for (const auto& row : result.rows) {
    if (row.analytic.acc > best_acc + 1e-12) {
      best_acc = row.analytic.acc;
      result.best_theta = row.theta;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Growth comparison
// ---------------------------------------------------------------------------

void GrowthConfig::validate() const {
  FilterParams{m, k, 0}.validate();
  if (n_start == 0 || n_step == 0 || n_stop < n_start) {
    throw std::invalid_argument("n range must satisfy 1 <= start <= stop, step >= 1");
  }
  if (query_count == 0 || trials == 0) {
    throw std::invalid_argument("query_count and trials must be >= 1");
  }
  if (!(erase_fraction >= 0.0 && erase_fraction <= 1.0)) {
    throw std::invalid_argument("erase_fraction must be in [0, 1]");
  }
  tune::TuneConstraint{l_tpr}.validate();
}

std::vector<std::uint64_t> GrowthConfig::n_values() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = n_start; n <= n_stop; n += n_step) {
    out.push_back(n);
  }
  return out;
}

const TrialRecord& GrowthResult::at(std::uint64_t n, FilterKind kind) const {
  for (const auto& r : records) {
    if (r.n == n && r.filter_kind == kind) {
      return r;
    }
  }
  throw std::out_of_range("no record for n=" + std::to_string(n));
}

GrowthResult run_growth_comparison(const GrowthConfig& config) {
  config.validate();
  const auto ns = config.n_values();
  const std::uint64_t m = config.m;
  const std::uint32_t k = config.k;
  constexpr std::size_t kKinds = 4;

  // Trial-independent parts: tuning, optimal k, analytic rates, rebuild flags.
  std::vector<tune::TuneResult> tunes;
  std::vector<std::uint32_t> k_opt;
  GrowthResult result;
  result.config = config;
  result.records.resize(ns.size() * kKinds);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::uint64_t n = ns[i];
    tunes.push_back(tune::optimize_theta_T(m, n, k, {config.l_tpr}));
    k_opt.push_back(std::min<std::uint64_t>(model::optimal_k(m, n), m));
    const bool rebuild = i == 0 || k_opt[i] != k_opt[i - 1];
    result.rebuild_count += rebuild ? 1 : 0;

    const auto plain = model::rates({m, n, k, 0, k});
    const auto optimized = model::rates({m, n, k_opt[i], 0, k_opt[i]});
    const auto retouched = retouched_analytic(m, n, k, config.erase_fraction);
    const auto& abf = tunes[i];

    auto* rec = &result.records[i * kKinds];
    rec[0] = {n, k, FilterKind::kAbf, abf.theta, abf.T, 0, 0, 0, abf.predicted.tpr, abf.predicted.fpr,
              abf.predicted.acc, false};
    rec[1] = {n, k_opt[i], FilterKind::kOptimizedBf, 0, k_opt[i], 0, 0, 0, optimized.tpr, optimized.fpr,
              optimized.acc, rebuild};
    rec[2] = {n, k, FilterKind::kNonoptimizedBf, 0, k, 0, 0, 0, plain.tpr, plain.fpr, plain.acc, false};
    rec[3] = {n,
              k,
              FilterKind::kRetouchedBf,
              0,
              k,
              0,
              0,
              0,
              retouched.tpr,
              retouched.fpr,
              model::accuracy(retouched.tpr, retouched.fpr),
              false};
  }

  for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
    const auto seeds = trial_seeds(config.base_seed, trial);
    const FilterParams fixed{m, k, seeds.hash_seed};
    const auto absent = stream_digests(fixed, seeds.element_key, kAbsentOffset, config.query_count);
    std::vector<ElementDigest> stored;
    stored.reserve(ns.back());
    CountingFilter filter(fixed);

    std::optional<CountingFilter> optimized;
    std::vector<ElementDigest> optimized_stored;
    std::vector<ElementDigest> optimized_absent;

    for (std::size_t i = 0; i < ns.size(); ++i) {
      const std::uint64_t n = ns[i];
      // The fixed-k counting filter only ever grows.
      for (auto& d : stream_digests(fixed, seeds.element_key, stored.size(), n - stored.size())) {
        filter.insert(d);
        stored.push_back(std::move(d));
      }

      const FilterParams opt_params{m, k_opt[i], seeds.hash_seed};
      if (!optimized || optimized->params().k != k_opt[i]) {
        optimized.emplace(opt_params);
        optimized_stored.clear();
        optimized_absent = stream_digests(opt_params, seeds.element_key, kAbsentOffset, config.query_count);
      }
      for (auto& d :
           stream_digests(opt_params, seeds.element_key, optimized_stored.size(), n - optimized_stored.size())) {
        optimized->insert(d);
        optimized_stored.push_back(std::move(d));
      }

      const auto& abf = tunes[i];
      const auto plain_view = binarize(filter, 0, k);
      const std::array<EmpiricalRates, kKinds> measured = {
          measure_view(binarize(filter, abf.theta, abf.T), stored, absent),
          measure_view(binarize(*optimized, 0, k_opt[i]), optimized_stored, optimized_absent),
          measure_view(plain_view, stored, absent),
          measure_view(retouched_bf(plain_view, config.erase_fraction, seeds.erase_seed ^ n), stored, absent),
      };
      for (std::size_t j = 0; j < kKinds; ++j) {
        auto& rec = result.records[i * kKinds + j];
        rec.empirical_tpr += measured[j].tpr;
        rec.empirical_fpr += measured[j].fpr;
      }
    }
  }

  for (auto& rec : result.records) {
    rec.empirical_tpr /= config.trials;
    rec.empirical_fpr /= config.trials;
    rec.empirical_acc = model::accuracy(rec.empirical_tpr, rec.empirical_fpr);
  }
  return result;
}

void write_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.n << ',' << r.k << ',' << to_string(r.filter_kind) << ',' << r.theta << ',' << r.T << ','
        << format_g6(r.empirical_tpr) << ',' << format_g6(r.empirical_fpr) << ',' << format_g6(r.empirical_acc)
        << ',' << format_g6(r.analytic_tpr) << ',' << format_g6(r.analytic_fpr) << ','
        << format_g6(r.analytic_acc) << ',' << (r.rebuild_flag ? 1 : 0) << '\n';
  }
}

void write_pmf_csv(std::ostream& out, const ThresholdSweepResult& result) {
  out << "theta,d,pmf_stored,pmf_absent,freq_stored,freq_absent\n";
  for (const auto& row : result.rows) {
    for (std::size_t d = 0; d < row.pmf_stored.size(); ++d) {
      out << row.theta << ',' << d << ',' << format_g6(row.pmf_stored[d]) << ',' << format_g6(row.pmf_absent[d])
          << ',' << format_g6(row.freq_stored[d]) << ',' << format_g6(row.freq_absent[d]) << '\n';
    }
  }
}

}  // namespace abf::harness
