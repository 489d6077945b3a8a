// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "abf/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abf::tune {

namespace {

constexpr double kTieEps = 1e-12;

double evaluate(const ScoreFn& score, const model::RateEstimate& r) { return score ? score(r) : r.acc; }

}  // namespace

void TuneConstraint::validate() const {
  if (!(l_tpr >= 0.0 && l_tpr <= 1.0)) {
    throw std::invalid_argument("l_tpr must be in [0, 1]");
  }
}

std::uint32_t theta_cap(std::uint64_t m, std::uint64_t n, std::uint32_t k) {
  const double p = static_cast<double>(k) / static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double cap = std::ceil(nd * p + 6.0 * std::sqrt(nd * p * (1.0 - p)));
  return static_cast<std::uint32_t>(std::min(nd, cap));
}

TuneResult optimize_T(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta,
                      const TuneConstraint& constraint, const ScoreFn& score) {
  constraint.validate();
  TuneResult best;
  double best_score = 0.0;
  // Walk T downward so that on a tie the larger T is kept.
  for (std::uint32_t T = k + 1; T-- > 0;) {
    const auto r = model::rates({m, n, k, theta, T});
    ++best.candidates_evaluated;
    if (r.tpr < constraint.l_tpr) {
      continue;
    }
    const double s = evaluate(score, r);
    if (!best.feasible || s > best_score + kTieEps) {
      best.theta = theta;
      best.T = T;
      best.predicted = r;
      best.feasible = true;
      best_score = s;
    }
  }
  return best;
}

TuneResult optimize_theta_T(std::uint64_t m, std::uint64_t n, std::uint32_t k, const TuneConstraint& constraint,
                            std::optional<std::uint32_t> theta_max, const ScoreFn& score) {
  constraint.validate();
  const std::uint32_t top = theta_max.value_or(theta_cap(m, n, k));
  TuneResult best;
  double best_score = 0.0;
  std::size_t evaluated = 0;
  for (std::uint32_t theta = 0; theta <= top; ++theta) {
    const auto r = optimize_T(m, n, k, theta, constraint, score);
    evaluated += r.candidates_evaluated;
    if (!r.feasible) {
      continue;
    }
    const double s = evaluate(score, r.predicted);
    if (!best.feasible || s > best_score + kTieEps) {
      best = r;
      best_score = s;
    }
  }
  best.candidates_evaluated = evaluated;
  return best;
}

Autoscaler::Autoscaler(TuneConstraint constraint, double retune_trigger)
    : constraint_(constraint), retune_trigger_(retune_trigger) {
  constraint_.validate();
  if (!(retune_trigger_ >= 0.0)) {
    throw std::invalid_argument("retune trigger must be >= 0");
  }
}

std::shared_ptr<const AbfView> Autoscaler::view_for(const CountingFilter& filter) {
  const std::uint64_t n = filter.n_stored();
  if (n == 0) {
    throw std::invalid_argument("cannot tune an empty filter");
  }
  if (cached_ && cached_->params() == filter.params()) {
    const auto snap = static_cast<double>(cached_->n_at_snapshot());
    const double drift = std::fabs(static_cast<double>(n) - snap) / snap;
    if (drift <= retune_trigger_) {
      return cached_;
    }
  }
  const FilterParams& p = filter.params();
  last_tune_ = optimize_theta_T(p.m, n, p.k, constraint_);
  cached_ = std::make_shared<const AbfView>(binarize(filter, last_tune_->theta, last_tune_->T));
  ++retunes_;
  return cached_;
}

std::shared_ptr<const AbfView> autoscale(const CountingFilter& filter, Autoscaler& scaler) {
  return scaler.view_for(filter);
}

}  // namespace abf::tune
