// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "abf/filter.hpp"

#include <algorithm>
#include <bit>

#include "abf/hash.hpp"

namespace abf {

void FilterParams::validate() const {
  if (m == 0 || m > (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("m must be in [1, 2^32], got " + std::to_string(m));
  }
  if (k == 0 || k > m) {
    throw std::invalid_argument("k must be in [1, m], got k=" + std::to_string(k) +
                                " m=" + std::to_string(m));
  }
  if (counter_max == 0) {
    throw std::invalid_argument("counter_max must be >= 1");
  }
}

ElementDigest ElementDigest::from_indices(const FilterParams& params, std::vector<std::uint32_t> indices) {
  params.validate();
  if (indices.size() != params.k) {
    throw std::invalid_argument("digest needs exactly k=" + std::to_string(params.k) + " indices");
  }
  std::vector<std::uint32_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("digest indices must be distinct");
  }
  if (sorted.back() >= params.m) {
    throw std::invalid_argument("digest index out of range");
  }
  return ElementDigest(std::move(indices));
}

ElementDigest digest(std::span<const std::byte> element, const FilterParams& params) {
  params.validate();
  if (element.empty()) {
    throw std::invalid_argument("element must be non-empty");
  }
  const Hash128 h = murmur3_128(element, params.seed);
  const std::uint64_t m = params.m;
  const std::uint32_t k = params.k;

  // x_i = h1 + i*h2 + (i^3 - i)/6 (mod m), evaluated incrementally.
  std::uint64_t x = h.low % m;
  std::uint64_t y = h.high % m;

  std::vector<std::uint32_t> out;
  out.reserve(k);
  // Small k: linear scan over chosen indices; otherwise a position bitmap.
  const bool use_bitmap = k > 32;
  std::vector<bool> taken(use_bitmap ? m : 0);
  auto is_taken = [&](std::uint64_t idx) {
    if (use_bitmap) {
      return static_cast<bool>(taken[idx]);
    }
    return std::find(out.begin(), out.end(), static_cast<std::uint32_t>(idx)) != out.end();
  };

  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint64_t idx = x;
    while (is_taken(idx)) {
      idx = idx + 1 == m ? 0 : idx + 1;
    }
    out.push_back(static_cast<std::uint32_t>(idx));
    if (use_bitmap) {
      taken[idx] = true;
    }
    x = (x + y) % m;
    y = (y + i + 1) % m;
  }
  return ElementDigest(std::move(out));
}

ElementDigest digest(std::string_view element, const FilterParams& params) {
  return digest(std::as_bytes(std::span(element.data(), element.size())), params);
}

CountingFilter::CountingFilter(const FilterParams& params) : params_(params) {
  params_.validate();
  counters_.assign(params_.m, 0);
}

CountingFilter CountingFilter::from_state(const FilterParams& params, std::vector<std::uint32_t> counters,
                                          std::uint64_t n_stored) {
  CountingFilter f(params);
  if (counters.size() != params.m) {
    throw std::invalid_argument("counter array length does not match m");
  }
  std::uint64_t sum = 0;
  for (std::uint32_t c : counters) {
    if (c > params.counter_max) {
      throw std::invalid_argument("counter exceeds counter_max");
    }
    sum += c;
  }
  if (sum != n_stored * params.k) {
    throw std::invalid_argument("counter sum " + std::to_string(sum) + " != k * n_stored");
  }
  f.counters_ = std::move(counters);
  f.n_stored_ = n_stored;
  return f;
}

void CountingFilter::check_digest(const ElementDigest& d) const {
  if (d.size() != params_.k) {
    throw std::invalid_argument("digest was not produced under this filter's parameters");
  }
}

void CountingFilter::insert(const ElementDigest& d) {
  check_digest(d);
  for (std::uint32_t i : d.indices()) {
    if (i >= params_.m) {
      throw std::invalid_argument("digest index out of range");
    }
    if (counters_[i] >= params_.counter_max) {
      throw OverflowError("counter " + std::to_string(i) + " is at counter_max " +
                          std::to_string(params_.counter_max));
    }
  }
  for (std::uint32_t i : d.indices()) {
    ++counters_[i];
  }
  ++n_stored_;
}

void CountingFilter::remove(const ElementDigest& d) {
  check_digest(d);
  if (n_stored_ == 0) {
    throw UnderflowError("filter is empty");
  }
  for (std::uint32_t i : d.indices()) {
    if (i >= params_.m) {
      throw std::invalid_argument("digest index out of range");
    }
    if (counters_[i] == 0) {
      throw UnderflowError("counter " + std::to_string(i) + " is zero");
    }
  }
  for (std::uint32_t i : d.indices()) {
    --counters_[i];
  }
  --n_stored_;
}

std::size_t AbfView::popcount() const noexcept {
  std::size_t total = 0;
  for (std::uint64_t w : words_) {
    total += static_cast<std::size_t>(std::popcount(w));
  }
  return total;
}

std::vector<bool> AbfView::bits() const {
  std::vector<bool> out(params_.m);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = bit(i);
  }
  return out;
}

std::uint32_t AbfView::dot(const ElementDigest& d) const noexcept {
  std::uint32_t total = 0;
  for (std::uint32_t i : d.indices()) {
    total += static_cast<std::uint32_t>((words_[i >> 6] >> (i & 63)) & 1U);
  }
  return total;
}

AbfView AbfView::with_decision_threshold(std::uint32_t decision_threshold) const {
  if (decision_threshold > params_.k) {
    throw std::invalid_argument("decision threshold T must be in [0, k]");
  }
  AbfView out = *this;
  out.decision_threshold_ = decision_threshold;
  return out;
}

AbfView AbfView::with_cleared(std::span<const std::size_t> positions) const {
  AbfView out = *this;
  for (std::size_t i : positions) {
    if (i >= params_.m) {
      throw std::invalid_argument("position out of range");
    }
    out.words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
  return out;
}

AbfView binarize(const CountingFilter& filter, std::uint32_t theta, std::uint32_t decision_threshold) {
  const FilterParams& p = filter.params();
  if (decision_threshold > p.k) {
    throw std::invalid_argument("decision threshold T must be in [0, k]");
  }
  AbfView view;
  view.params_ = p;
  view.theta_ = theta;
  view.decision_threshold_ = decision_threshold;
  view.n_at_snapshot_ = filter.n_stored();
  view.words_.assign((p.m + 63) / 64, 0);
  const auto counters = filter.counters();
  for (std::size_t i = 0; i < counters.size(); ++i) {
    if (counters[i] > theta) {
      view.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
  return view;
}

}  // namespace abf
