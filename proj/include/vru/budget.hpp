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
#include <cstdint>
#include <limits>

#include "vru/errors.hpp"

namespace vru {

// Which data pool a gradient evaluation touched.
enum class Pool { retain, forget };

// Counts per-sample gradient evaluations against a fixed limit. One unit is
// one evaluation of a single-sample gradient, at any parameter vector.
class BudgetMeter {
 public:
  explicit BudgetMeter(std::int64_t limit) : limit_(limit) {
    if (limit < 0) throw UsageError("budget limit must be non-negative");
  }

  static BudgetMeter unlimited() {
    return BudgetMeter(std::numeric_limits<std::int64_t>::max());
  }

  std::int64_t limit() const { return limit_; }
  std::int64_t used() const { return retain_ + forget_; }
  std::int64_t remaining() const { return limit_ - used(); }
  std::int64_t used_by(Pool pool) const {
    return pool == Pool::retain ? retain_ : forget_;
  }
  bool can_afford(std::int64_t units) const { return units <= remaining(); }

  // Charges `units`; refuses (returns false, charges nothing) when that would
  // exceed the limit.
  bool charge(std::int64_t units, Pool pool = Pool::retain) {
    if (units < 0) throw UsageError("cannot charge a negative budget");
    if (!can_afford(units)) return false;
    (pool == Pool::retain ? retain_ : forget_) += units;
    return true;
  }

 private:
  std::int64_t limit_;
  std::int64_t retain_ = 0;
  std::int64_t forget_ = 0;
};

}  // namespace vru
