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

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "vru/errors.hpp"

namespace vru {

// Gaussian-mechanism multiplier: sqrt(2 ln(2.5 / delta)) / epsilon.
inline double kappa_dp(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw UsageError("kappa_dp: epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw UsageError("kappa_dp: delta must lie in (0, 1)");
  return std::sqrt(2.0 * std::log(2.5 / delta)) / epsilon;
}

// h(T, delta) = 1 + 624 (ln ln T + ln(2 / delta)), natural logarithms, with
// ln ln T clamped at 0 for T < e^e so that h >= 1.
inline double h_of(std::int64_t steps, double delta) {
  if (steps < 2) throw UsageError("h_of: T must be at least 2");
  if (!(delta > 0.0 && delta < 1.0))
    throw UsageError("h_of: delta must lie in (0, 1)");
  const double loglog = std::max(std::log(std::log(static_cast<double>(steps))), 0.0);
  return 1.0 + 624.0 * (loglog + std::log(2.0 / delta));
}

// High-probability bound on |theta_T - theta*_r| / ratio after T projected
// steps: sqrt(2 h) * grad_scale * (1 + cond) / (mu sqrt(T)). grad_scale is
// the Lipschitz constant or its forget-gradient-norm substitute.
inline double nu_T(std::int64_t steps, double delta, double grad_scale,
                   double mu, double condition_number) {
  if (!(mu > 0.0)) throw UsageError("nu_T: mu must be > 0");
  if (grad_scale < 0.0) throw UsageError("nu_T: negative gradient scale");
  return std::sqrt(2.0 * h_of(steps, delta)) * grad_scale *
         (1.0 + condition_number) / (mu * std::sqrt(static_cast<double>(steps)));
}

// (epsilon, delta) target plus the derived noise multiplier. delta is split
// evenly: delta/2 for the sensitivity bound failing, delta/2 for the Gaussian
// mechanism, so the released guarantee is (epsilon, delta).
struct PrivacyBudget {
  double epsilon = 0.0;  // 0 when kappa was set directly
  double delta = 0.05;
  double kappa = 1.0;

  static PrivacyBudget from_epsilon_delta(double epsilon, double delta) {
    return PrivacyBudget{epsilon, delta, kappa_dp(epsilon, delta)};
  }

  static PrivacyBudget direct(double kappa, double delta = 0.05) {
    if (kappa < 0.0) throw UsageError("kappa must be non-negative");
    if (!(delta > 0.0 && delta < 1.0))
      throw UsageError("delta must lie in (0, 1)");
    return PrivacyBudget{0.0, delta, kappa};
  }

  double sensitivity_failure_delta() const { return delta / 2.0; }
  double mechanism_delta() const { return delta / 2.0; }
};

struct VruSchedule {
  std::int64_t steps = 0;
  double h = 0.0;
  double nu = 0.0;
  double radius = 0.0;
  double ratio = 0.0;
};

// Schedule quantities with the forget-gradient norm standing in for the
// Lipschitz constant.
inline VruSchedule make_vru_schedule(std::int64_t steps, double delta,
                                     double grad_scale, double mu,
                                     double condition_number, double ratio) {
  VruSchedule s;
  s.steps = steps;
  s.ratio = ratio;
  s.radius = ratio * grad_scale / mu;
  s.h = h_of(steps, delta);
  s.nu = nu_T(steps, delta, grad_scale, mu, condition_number);
  return s;
}

}  // namespace vru
