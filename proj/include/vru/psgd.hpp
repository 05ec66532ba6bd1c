// Copyright 2026 The VRU Unlearning Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>

#include "vru/budget.hpp"
#include "vru/errors.hpp"
#include "vru/loss.hpp"
#include "vru/projection.hpp"
#include "vru/rng.hpp"
#include "vru/schedule.hpp"

namespace vru {

// Run until the budget meter can no longer pay for a step.
inline constexpr std::int64_t kUntilBudget =
    std::numeric_limits<std::int64_t>::max();

// A stochastic gradient source for psgd(). gradient() adds the batch-mean
// estimate into `out` (zeroed by the caller) and must draw all of its
// randomness from `rng`. Each batch element costs units_per_sample() budget
// units, booked by charge().
template <class O>
concept GradientOracle = requires(O& oracle, const Vector& theta,
                                  std::size_t batch, RngStream& rng,
                                  Vector& out, BudgetMeter& meter) {
  { oracle.units_per_sample() } -> std::convertible_to<std::int64_t>;
  oracle.gradient(theta, batch, rng, out);
  oracle.charge(meter, batch);
};

struct PsgdResult {
  Vector theta;
  std::int64_t steps = 0;
  bool truncated = false;  // stopped by the budget before `steps` updates
};

struct NoObserver {
  void operator()(std::int64_t, const Vector&) const {}
};

// Projected SGD: theta_{t+1} = project(theta_t - step(t) * g_t), t = 1..steps.
//
// When the meter cannot pay for a full batch, the final step runs on the
// largest batch it can pay for, so budget-driven runs leave less than one
// sample's cost unspent. The observer sees every post-projection iterate.
template <GradientOracle O, class Projector, class Observer = NoObserver>
PsgdResult psgd(O& oracle, Vector start, const StepSchedule& schedule,
                std::int64_t steps, std::size_t batch_size,
                const Projector& project, BudgetMeter& meter, RngStream& rng,
                Observer&& observe = {}) {
  if (steps < 0) throw UsageError("psgd: negative step count");
  if (batch_size == 0) throw UsageError("psgd: batch size must be >= 1");
  PsgdResult result{std::move(start), 0, false};
  Vector& theta = result.theta;
  Vector grad(theta.size());
  const std::int64_t units = oracle.units_per_sample();
  for (std::int64_t t = 1; t <= steps; ++t) {
    std::size_t batch = batch_size;
    if (units > 0) {
      const auto affordable = meter.remaining() / units;
      if (affordable < static_cast<std::int64_t>(batch)) {
        if (affordable <= 0) {
          result.truncated = true;
          break;
        }
        batch = static_cast<std::size_t>(affordable);
      }
    }
    oracle.charge(meter, batch);
    grad.setZero();
    oracle.gradient(theta, batch, rng, grad);
    Vector next = theta - schedule(t) * grad;
    theta = project(next);
    if (!theta.allFinite()) throw RunError("psgd: non-finite iterate", t);
    ++result.steps;
    observe(t, theta);
  }
  return result;
}

// Plain minibatch gradient: indices drawn uniformly with replacement.
template <SampleLoss L>
class MinibatchGradient {
 public:
  using data_type = typename L::data_type;

  MinibatchGradient(const L& loss, const data_type& data,
                    Pool pool = Pool::retain)
      : loss_(loss), data_(data), pool_(pool) {
    if (data.size() == 0) throw UsageError("minibatch gradient: empty data");
  }

  std::int64_t units_per_sample() const { return 1; }

  void charge(BudgetMeter& meter, std::size_t batch) const {
    meter.charge(static_cast<std::int64_t>(batch), pool_);
  }

  void gradient(const Vector& theta, std::size_t batch, RngStream& rng,
                Vector& out) const {
    const double w = 1.0 / static_cast<double>(batch);
    for (std::size_t k = 0; k < batch; ++k)
      loss_.accumulate_sample_grad(theta, data_, rng.uniform_index(data_.size()),
                                   w, out);
  }

 private:
  const L& loss_;
  const data_type& data_;
  Pool pool_;
};

}  // namespace vru
