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

#include "vru/errors.hpp"
#include "vru/rng.hpp"

namespace vru {

// Euclidean projection onto the closed ball B(center, radius).
inline Vector project_ball(const Vector& x, const Vector& center,
                           double radius) {
  if (radius < 0.0) throw UsageError("projection radius must be >= 0");
  if (x.size() != center.size())
    throw UsageError("projection: dimension mismatch");
  const Vector offset = x - center;
  const double dist = offset.norm();
  if (dist <= radius) return x;
  if (radius == 0.0) return center;
  return center + (radius / dist) * offset;
}

struct BallProjector {
  Vector center;
  double radius;

  Vector operator()(const Vector& x) const {
    return project_ball(x, center, radius);
  }
};

struct IdentityProjector {
  const Vector& operator()(const Vector& x) const { return x; }
};

}  // namespace vru
