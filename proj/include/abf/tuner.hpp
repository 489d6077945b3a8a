// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "abf/filter.hpp"
#include "abf/model.hpp"

namespace abf::tune {

struct TuneConstraint {
  double l_tpr = 0.0;  // lowest acceptable predicted TPR

  //! Throws std::invalid_argument unless 0 <= l_tpr <= 1.
  void validate() const;
};

//! Objective maximized by the tuner. Defaults to ACC = (TPR + 1 - FPR) / 2.
using ScoreFn = std::function<double(const model::RateEstimate&)>;

struct TuneResult {
  std::uint32_t theta{};
  std::uint32_t T{};
  model::RateEstimate predicted;
  bool feasible = false;
  std::size_t candidates_evaluated = 0;
};

//! Upper end of the theta sweep: min(n, ceil(mean + 6 sd)) of a Binomial(n, k/m) counter.
[[nodiscard]] std::uint32_t theta_cap(std::uint64_t m, std::uint64_t n, std::uint32_t k);

//! Best T in [0, k] for a fixed theta among those meeting the TPR floor.
//! Score ties within 1e-12 go to the larger T.
[[nodiscard]] TuneResult optimize_T(std::uint64_t m, std::uint64_t n, std::uint32_t k, std::uint32_t theta,
                                    const TuneConstraint& constraint, const ScoreFn& score = {});

//! Exhaustive (theta, T) search; theta runs over [0, theta_max] where theta_max
//! defaults to theta_cap. Score ties within 1e-12 go to the smaller theta.
[[nodiscard]] TuneResult optimize_theta_T(std::uint64_t m, std::uint64_t n, std::uint32_t k,
                                          const TuneConstraint& constraint,
                                          std::optional<std::uint32_t> theta_max = std::nullopt,
                                          const ScoreFn& score = {});

inline constexpr double kDefaultRetuneTrigger = 0.1;

//! Keeps a tuned view of one counting filter and retunes it lazily when the number
//! of stored elements drifts. Calls for the same filter must be serialized; the
//! returned views are immutable and can be shared freely.
class Autoscaler {
 public:
  explicit Autoscaler(TuneConstraint constraint, double retune_trigger = kDefaultRetuneTrigger);

  //! Throws std::invalid_argument if the filter is empty.
  std::shared_ptr<const AbfView> view_for(const CountingFilter& filter);

  [[nodiscard]] const std::optional<TuneResult>& last_tune() const noexcept { return last_tune_; }
  [[nodiscard]] std::size_t retune_count() const noexcept { return retunes_; }

 private:
  TuneConstraint constraint_;
  double retune_trigger_;
  std::shared_ptr<const AbfView> cached_;
  std::optional<TuneResult> last_tune_;
  std::size_t retunes_ = 0;
};

//! One-shot form of Autoscaler::view_for.
std::shared_ptr<const AbfView> autoscale(const CountingFilter& filter, Autoscaler& scaler);

}  // namespace abf::tune
