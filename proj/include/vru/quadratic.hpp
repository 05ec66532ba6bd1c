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
#include <vector>

#include "vru/errors.hpp"
#include "vru/loss.hpp"

namespace vru {

struct PointSet {
  std::vector<Vector> points;

  std::size_t size() const { return points.size(); }
  const Vector& operator[](std::size_t i) const { return points[i]; }
};

// l(theta, xi) = 1/2 (theta - xi)^T diag(a) (theta - xi) + lambda/2 |theta|^2.
// Closed-form optimum and exact constants make it the reference problem for
// oracle tests of the generic engines.
class QuadraticLoss {
 public:
  using data_type = PointSet;

  QuadraticLoss(Vector curvature, double lambda)
      : curvature_(std::move(curvature)), lambda_(lambda) {
    if ((curvature_.array() < 0.0).any())
      throw ConfigError("quadratic curvature must be non-negative");
  }

  std::size_t dim() const { return static_cast<std::size_t>(curvature_.size()); }
  double mu() const { return curvature_.minCoeff() + lambda_; }
  double beta() const { return curvature_.maxCoeff() + lambda_; }
  double lambda() const { return lambda_; }
  const Vector& curvature() const { return curvature_; }

  void accumulate_sample_grad(const Vector& theta, const PointSet& data,
                              std::size_t i, double w, Vector& out) const {
    out.array() += w * (curvature_.array() * (theta - data[i]).array() +
                        lambda_ * theta.array());
  }

  Vector batch_grad(const Vector& theta, const PointSet& data) const {
    if (data.size() == 0) throw UsageError("batch_grad: empty batch");
    Vector g = Vector::Zero(theta.size());
    const double w = 1.0 / static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      accumulate_sample_grad(theta, data, i, w, g);
    return g;
  }

  double loss(const Vector& theta, const PointSet& data) const {
    double total = 0.0;
    for (const Vector& xi : data.points)
      total += 0.5 * (curvature_.array() * (theta - xi).array().square()).sum();
    return total / static_cast<double>(data.size()) +
           0.5 * lambda_ * theta.squaredNorm();
  }

  Vector optimum(const PointSet& data) const {
    Vector mean = Vector::Zero(curvature_.size());
    for (const Vector& xi : data.points) mean += xi;
    mean /= static_cast<double>(data.size());
    return (curvature_.array() * mean.array() /
            (curvature_.array() + lambda_)).matrix();
  }

 private:
  Vector curvature_;
  double lambda_;
};

static_assert(SampleLoss<QuadraticLoss>);

}  // namespace vru
