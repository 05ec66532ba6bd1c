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

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "vru/budget.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/loss.hpp"
#include "vru/psgd.hpp"
#include "vru/schedule.hpp"

namespace vru {

struct TrainResult {
  Vector theta;
  std::int64_t budget_used = 0;
  std::int64_t steps = 0;
  bool warning = false;  // zero budget: theta is the initialization
};

// Minibatch SGD from `start`, spending up to `budget` sample gradients.
template <SampleLoss L>
TrainResult sgd(const L& loss, const typename L::data_type& data, Vector start,
                const StepSchedule& schedule, std::size_t batch_size,
                std::int64_t budget, RngStream& rng) {
  if (budget < 0) throw UsageError("sgd: negative budget");
  if (budget == 0) return TrainResult{std::move(start), 0, 0, true};
  BudgetMeter meter(budget);
  MinibatchGradient<L> oracle(loss, data);
  PsgdResult r = psgd(oracle, std::move(start), schedule, kUntilBudget,
                      batch_size, IdentityProjector{}, meter, rng);
  return TrainResult{std::move(r.theta), meter.used(), r.steps, false};
}

// SGD retraining on the retain set from the zero vector.
template <SampleLoss L>
TrainResult retrain_sgd(const L& loss, const typename L::data_type& retain,
                        std::int64_t budget, const StepSchedule& schedule,
                        RngStream& rng, std::size_t batch_size = 8) {
  return sgd(loss, retain, Vector::Zero(static_cast<Eigen::Index>(loss.dim())),
             schedule, batch_size, budget, rng);
}

// Full-batch GD retraining from the zero vector. Each step costs |retain|.
// A remainder smaller than |retain| is spent on one last step over that many
// retain samples drawn without replacement.
template <SampleLoss L>
TrainResult retrain_gd(const L& loss, const typename L::data_type& retain,
                       std::int64_t budget, const StepSchedule& schedule,
                       RngStream& rng) {
  const auto n = static_cast<std::int64_t>(retain.size());
  if (n == 0) throw UsageError("retrain_gd: empty retain set");
  TrainResult out{Vector::Zero(static_cast<Eigen::Index>(loss.dim())), 0, 0,
                  false};
  if (budget == 0) {
    out.warning = true;
    return out;
  }
  if (budget < n)
    throw UsageError("retrain_gd: budget below one full-batch step");
  BudgetMeter meter(budget);
  std::int64_t t = 1;
  while (meter.charge(n)) {
    out.theta -= schedule(t) * loss.batch_grad(out.theta, retain);
    if (!out.theta.allFinite()) throw RunError("retrain_gd: non-finite iterate", t);
    ++t;
  }
  if (const std::int64_t rest = meter.remaining(); rest > 0) {
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    detail::shuffle_prefix(order, static_cast<std::size_t>(rest), rng);
    Vector g = Vector::Zero(out.theta.size());
    const double w = 1.0 / static_cast<double>(rest);
    for (std::int64_t k = 0; k < rest; ++k)
      loss.accumulate_sample_grad(out.theta, retain,
                                  order[static_cast<std::size_t>(k)], w, g);
    meter.charge(rest);
    out.theta -= schedule(t) * g;
    ++t;
  }
  out.steps = t - 1;
  out.budget_used = meter.used();
  return out;
}

// grad l(theta, xi_i) - grad l(anchor, xi_i) + anchor_grad.
template <SampleLoss L>
Vector svrg_estimate(const L& loss, const typename L::data_type& data,
                     const Vector& theta, const Vector& anchor,
                     const Vector& anchor_grad, std::size_t i) {
  Vector g = anchor_grad;
  loss.accumulate_sample_grad(theta, data, i, 1.0, g);
  loss.accumulate_sample_grad(anchor, data, i, -1.0, g);
  return g;
}

// SVRG retraining from zero. Each outer cycle refreshes the full-batch anchor
// gradient (|retain| units) and then runs ceil(|retain| / batch) inner steps,
// each costing 2 units per batch sample. The schedule is indexed by the
// global inner-step counter. Once no full cycle fits, leftover budget goes to
// inner steps against the last anchor, the final one on a smaller batch.
template <SampleLoss L>
TrainResult retrain_svrg(const L& loss, const typename L::data_type& retain,
                         std::int64_t budget, const StepSchedule& schedule,
                         RngStream& rng, std::size_t batch_size = 1) {
  const auto n = static_cast<std::int64_t>(retain.size());
  if (n == 0) throw UsageError("retrain_svrg: empty retain set");
  if (batch_size == 0) throw UsageError("retrain_svrg: batch size must be >= 1");
  const auto d = static_cast<Eigen::Index>(loss.dim());
  TrainResult out{Vector::Zero(d), 0, 0, false};
  if (budget == 0) {
    out.warning = true;
    return out;
  }
  if (budget < 2 * n || budget < n + 2)
    throw UsageError("retrain_svrg: budget below one anchor pass plus inner steps");
  const auto b = static_cast<std::int64_t>(batch_size);
  const std::int64_t inner = (n + b - 1) / b;
  BudgetMeter meter(budget);
  Vector anchor, anchor_grad;
  std::int64_t t = 1;
  Vector g(d);
  // Returns false once not even a single-sample step is affordable.
  auto inner_step = [&]() {
    const std::int64_t m = std::min(b, meter.remaining() / 2);
    if (m <= 0) return false;
    meter.charge(2 * m);
    const double w = 1.0 / static_cast<double>(m);
    g = anchor_grad;
    for (std::int64_t k = 0; k < m; ++k) {
      const std::size_t i = rng.uniform_index(static_cast<std::size_t>(n));
      loss.accumulate_sample_grad(out.theta, retain, i, w, g);
      loss.accumulate_sample_grad(anchor, retain, i, -w, g);
    }
    out.theta -= schedule(t) * g;
    if (!out.theta.allFinite()) throw RunError("retrain_svrg: non-finite iterate", t);
    ++t;
    return true;
  };
  while (meter.remaining() >= n + 2) {
    meter.charge(n);
    anchor = out.theta;
    anchor_grad = loss.batch_grad(anchor, retain);
    for (std::int64_t k = 0; k < inner && inner_step(); ++k) {
    }
  }
  while (inner_step()) {
  }
  out.steps = t - 1;
  out.budget_used = meter.used();
  return out;
}

}  // namespace vru
