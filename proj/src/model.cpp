// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "abf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace abf::model {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("probability out of [0, 1]: " + std::to_string(p));
  }
}

void check_n(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("n must be >= 1");
  }
}

void check_mk(std::uint64_t m, std::uint32_t k) {
  if (k == 0 || m == 0 || k > m) {
    throw std::invalid_argument("require 1 <= k <= m");
  }
}

// log(x!) - log(sqrt(2 pi x) (x/e)^x)
double stirling_error(double x) {
  if (x <= 15.0) {
    return std::lgamma(x + 1.0) - (x + 0.5) * std::log(x) + x - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double xx = x * x;
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  return (s0 - (s1 - (s2 - (s3 - s4 / xx) / xx) / xx) / xx) / x;
}

// x log(x / np) + np - x, with a series when x is close to np.
double deviance(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) {
        return s1;
      }
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace

void ModelPoint::validate() const {
  check_mk(m, k);
  if (T > k) {
    throw std::invalid_argument("T must be in [0, k]");
  }
}

double binom_pmf(std::uint64_t g, double p, std::int64_t s) {
  check_probability(p);
  if (s < 0 || static_cast<std::uint64_t>(s) > g) {
    return 0.0;
  }
  const auto us = static_cast<std::uint64_t>(s);
  if (p == 0.0) {
    return us == 0 ? 1.0 : 0.0;
  }
  if (p == 1.0) {
    return us == g ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(g);
  const double q = 1.0 - p;
  if (us == 0) {
    return std::exp(n * std::log1p(-p));
  }
  if (us == g) {
    return std::exp(n * std::log(p));
  }
  // Saddle-point form: accurate to a few ulps, where a plain lgamma difference
  // loses ~1e-11 at n ~ 1e4.
  const double x = static_cast<double>(us);
  const double log_core =
      stirling_error(n) - stirling_error(x) - stirling_error(n - x) - deviance(x, n * p) - deviance(n - x, n * q);
  const double log_scale = std::log(2.0 * std::numbers::pi) + std::log(x) + std::log1p(-x / n);
  return std::exp(log_core - 0.5 * log_scale);
}

double binom_upper_tail(std::uint64_t g, double p, std::int64_t lo) {
  check_probability(p);
  if (lo <= 0) {
    return 1.0;
  }
  if (static_cast<std::uint64_t>(lo) > g) {
    return 0.0;
  }
  const double mean = static_cast<double>(g) * p;
  double sum = 0.0;
  if (static_cast<double>(lo) > mean) {
    // Terms only shrink past the mode; stop once they no longer move the sum.
    for (std::uint64_t s = static_cast<std::uint64_t>(lo); s <= g; ++s) {
      const double term = binom_pmf(g, p, static_cast<std::int64_t>(s));
      sum += term;
      if (term <= sum * 1e-18) {
        break;
      }
    }
    return std::clamp(sum, 0.0, 1.0);
  }
  for (std::int64_t s = 0; s < lo; ++s) {
    sum += binom_pmf(g, p, s);
  }
  return std::clamp(1.0 - sum, 0.0, 1.0);
}

double pr_counter(std::uint64_t n, double p1, std::int64_t v) {
  if (v < 0) {
    throw std::invalid_argument("counter value must be >= 0");
  }
  return binom_pmf(n, p1, v);
}

double p_empty(std::uint64_t m, std::uint64_t n, std::uint32_t k, CollisionModel model) {
  check_mk(m, k);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  if (model == CollisionModel::kDistinct) {
    return std::exp(nd * std::log1p(-static_cast<double>(k) / md));
  }
  return std::exp(static_cast<double>(k) * nd * std::log1p(-1.0 / md));
}

double expected_count_histogram(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::int64_t v) {
  check_mk(m, k);
  return static_cast<double>(m) * pr_counter(n, static_cast<double>(k) / static_cast<double>(m), v);
}

std::pair<double, double> p_zero_after_threshold(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                                                 std::uint32_t theta) {
  check_mk(m, k);
  const double p1 = static_cast<double>(k) / static_cast<double>(m);
  if (theta >= n) {
    return {1.0, 0.0};
  }
  // Sum the smaller tail directly and take the other as its complement.
  const double mean = static_cast<double>(n) * p1;
  if (static_cast<double>(theta) < mean) {
    double P0 = 0.0;
    for (std::uint32_t v = 0; v <= theta; ++v) {
      P0 += pr_counter(n, p1, v);
    }
    P0 = std::clamp(P0, 0.0, 1.0);
    return {P0, 1.0 - P0};
  }
  const double P1 = binom_upper_tail(n, p1, static_cast<std::int64_t>(theta) + 1);
  return {1.0 - P1, P1};
}

double expected_dot_stored(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta) {
  check_mk(m, k);
  check_n(n);
  const double p1 = static_cast<double>(k) / static_cast<double>(m);
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  if (theta >= n) {
    return 0.0;
  }
  if (static_cast<double>(theta) < static_cast<double>(n) * p1) {
    double suppressed = 0.0;
    for (std::uint32_t v = 1; v <= theta; ++v) {
      suppressed += static_cast<double>(v) * pr_counter(n, p1, v);
    }
    return static_cast<double>(k) - scale * suppressed;
  }
  // Above the mean use k = (m/n) E[I], so the result is (m/n) sum_{v > theta} v Pr(I = v);
  // this avoids cancellation when almost everything is suppressed.
  double kept = 0.0;
  for (std::uint64_t v = std::uint64_t{theta} + 1; v <= n; ++v) {
    const double term = static_cast<double>(v) * pr_counter(n, p1, static_cast<std::int64_t>(v));
    kept += term;
    if (term <= kept * 1e-18) {
      break;
    }
  }
  return scale * kept;
}

double expected_dot_absent(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta) {
  return static_cast<double>(k) * p_zero_after_threshold(m, n, k, theta).second;
}

std::pair<double, double> success_probs(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta) {
  const double p_x = expected_dot_stored(m, n, k, theta) / static_cast<double>(k);
  const double p_y = p_zero_after_threshold(m, n, k, theta).second;
  return {std::clamp(p_x, 0.0, 1.0), std::clamp(p_y, 0.0, 1.0)};
}

RateEstimate rates(const ModelPoint& point) {
  point.validate();
  check_n(point.n);
  const auto [m, n, k, theta, T] = point;
  RateEstimate r;
  r.p1 = static_cast<double>(k) / static_cast<double>(m);
  std::tie(r.P0, r.P1) = p_zero_after_threshold(m, n, k, theta);
  r.dbar_x = expected_dot_stored(m, n, k, theta);
  r.dbar_y = static_cast<double>(k) * r.P1;
  std::tie(r.p_x, r.p_y) = success_probs(m, n, k, theta);
  r.tpr = binom_upper_tail(k, r.p_x, T);
  r.fpr = binom_upper_tail(k, r.p_y, T);
  r.acc = accuracy(r.tpr, r.fpr);
  return r;
}

std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n) {
  check_n(n);
  const double k = std::round(static_cast<double>(m) / static_cast<double>(n) * std::numbers::ln2);
  return k < 1.0 ? 1U : static_cast<std::uint32_t>(k);
}

}  // namespace abf::model
