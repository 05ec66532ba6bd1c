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
#include <optional>
#include <string>

#include "vru/errors.hpp"
#include "vru/rng.hpp"

namespace vru {

// A per-sample loss over an indexable data container. All engines in this
// library are written against this concept, so the same optimization code
// drives the logistic model and the closed-form quadratic used in tests.
//
// accumulate_sample_grad adds w * grad l(theta, data[i]) into `out`;
// batch_grad returns the mean gradient over `data`.
template <class L>
concept SampleLoss = requires(const L& loss, const Vector& theta,
                              const typename L::data_type& data,
                              std::size_t i, double w, Vector& out) {
  typename L::data_type;
  { loss.dim() } -> std::convertible_to<std::size_t>;
  { loss.mu() } -> std::convertible_to<double>;
  { loss.beta() } -> std::convertible_to<double>;
  loss.accumulate_sample_grad(theta, data, i, w, out);
  { loss.batch_grad(theta, data) } -> std::convertible_to<Vector>;
  { data.size() } -> std::convertible_to<std::size_t>;
};

template <SampleLoss L>
Vector sample_grad(const L& loss, const Vector& theta,
                   const typename L::data_type& data, std::size_t i) {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(loss.dim()));
  loss.accumulate_sample_grad(theta, data, i, 1.0, g);
  return g;
}

struct OptimumReport {
  Vector theta;
  double grad_norm = 0.0;
  std::int64_t iterations = 0;
};

// Deterministic full-batch gradient descent with step 1/beta until the mean
// gradient norm drops to `tol`. Throws ConvergenceError carrying the final
// gradient norm when `max_iterations` is reached first.
template <SampleLoss L>
OptimumReport train_to_optimum_report(
    const L& loss, const typename L::data_type& data, double tol,
    const std::optional<Vector>& warm_start = std::nullopt,
    std::int64_t max_iterations = 1'000'000) {
  if (!(tol > 0.0)) throw UsageError("train_to_optimum: tol must be > 0");
  if (data.size() == 0) throw UsageError("train_to_optimum: empty dataset");
  const auto d = static_cast<Eigen::Index>(loss.dim());
  Vector theta = warm_start ? *warm_start : Vector::Zero(d);
  if (theta.size() != d)
    throw ConfigError("train_to_optimum: warm start has wrong dimension");
  const double step = 1.0 / loss.beta();
  for (std::int64_t it = 0;; ++it) {
    const Vector g = loss.batch_grad(theta, data);
    const double gn = g.norm();
    if (!std::isfinite(gn))
      throw ConvergenceError("train_to_optimum: non-finite gradient", gn, it);
    if (gn <= tol) return OptimumReport{std::move(theta), gn, it};
    if (it >= max_iterations)
      throw ConvergenceError(
          "train_to_optimum: no convergence after " +
              std::to_string(max_iterations) + " iterations (|grad| = " +
              std::to_string(gn) + ")",
          gn, it);
    theta -= step * g;
  }
}

template <SampleLoss L>
Vector train_to_optimum(const L& loss, const typename L::data_type& data,
                        double tol,
                        const std::optional<Vector>& warm_start = std::nullopt) {
  return train_to_optimum_report(loss, data, tol, warm_start).theta;
}

}  // namespace vru
