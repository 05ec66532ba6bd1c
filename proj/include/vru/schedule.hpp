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

#include <cmath>
#include <cstdint>

#include "vru/errors.hpp"

namespace vru {

// Step-size rule indexed by the 1-based step counter t.
//
//  * inverse_mu_t:        step(t) = base_lr / t with base_lr = 1 / mu.
//  * constant_with_decay: step(t) = base_lr * decay^epoch(t), where
//                         epoch(t) = (t - 1) / steps_per_epoch.
struct StepSchedule {
  enum class Kind { inverse_mu_t, constant_with_decay };

  Kind kind = Kind::constant_with_decay;
  double base_lr = 1.0;
  double decay = 1.0;
  std::int64_t steps_per_epoch = 1;

  static StepSchedule inverse_mu_t(double mu) {
    if (!(mu > 0.0)) throw ConfigError("inverse-mu-t schedule needs mu > 0");
    return StepSchedule{Kind::inverse_mu_t, 1.0 / mu, 1.0, 1};
  }

  static StepSchedule decayed(double lr, double decay,
                              std::int64_t steps_per_epoch) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(decay > 0.0 && decay <= 1.0))
      throw ConfigError("learning-rate decay must lie in (0, 1]");
    if (steps_per_epoch < 1)
      throw ConfigError("steps_per_epoch must be at least 1");
    return StepSchedule{Kind::constant_with_decay, lr, decay, steps_per_epoch};
  }

  static StepSchedule constant(double lr) { return decayed(lr, 1.0, 1); }

  double operator()(std::int64_t t) const {
    if (t < 1) throw UsageError("step index starts at t = 1");
    if (kind == Kind::inverse_mu_t) return base_lr / static_cast<double>(t);
    const auto epoch = (t - 1) / steps_per_epoch;
    return base_lr * std::pow(decay, static_cast<double>(epoch));
  }
};

}  // namespace vru
