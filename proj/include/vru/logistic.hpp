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
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/loss.hpp"

namespace vru {

// Multinomial logistic regression with an L2 penalty on every coordinate
// (bias included), so the per-sample loss is lambda-strongly convex.
//
// Parameter layout: theta has num_classes blocks of (feature_dim + 1)
// entries, the weights of class c followed by its bias.
struct LossSpec {
  double lambda = 0.1;
  double mu = 0.1;
  double beta_bound = 0.1;
  int num_classes = 2;
  int feature_dim = 1;

  std::size_t dim() const {
    return static_cast<std::size_t>(num_classes) *
           static_cast<std::size_t>(feature_dim + 1);
  }
  double condition_number() const { return beta_bound / mu; }

  // Constants valid for any features in [0, 1]^s; estimate_constants()
  // tightens beta_bound for a concrete dataset.
  static LossSpec logistic(double lambda, int num_classes, int feature_dim) {
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (num_classes < 2) throw ConfigError("need at least two classes");
    if (feature_dim < 1) throw ConfigError("need at least one feature");
    return LossSpec{lambda, lambda, lambda + 0.5 * (feature_dim + 1),
                    num_classes, feature_dim};
  }
};

struct RegularityConstants {
  double mu = 0.0;
  double beta_bound = 0.0;
};

// mu = lambda; beta_bound = lambda + max_i |x~_i|^2 / 2, with x~ the
// bias-augmented feature vector. The softmax Jacobian is bounded by I/2 in
// logit space, which gives the second term.
inline RegularityConstants estimate_constants(const LossSpec& spec,
                                              const Dataset& data) {
  if (data.empty()) throw UsageError("estimate_constants: empty dataset");
  const double max_sq = data.features().rowwise().squaredNorm().maxCoeff() + 1.0;
  return RegularityConstants{spec.lambda, spec.lambda + 0.5 * max_sq};
}

inline LossSpec with_constants(LossSpec spec, const RegularityConstants& c) {
  spec.mu = c.mu;
  spec.beta_bound = c.beta_bound;
  return spec;
}

namespace detail {

using WeightMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const WeightMatrix>;
using Weights = Eigen::Map<WeightMatrix>;

inline void check_theta(const LossSpec& spec, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim())
    throw ConfigError("parameter vector has length " +
                      std::to_string(theta.size()) + ", expected " +
                      std::to_string(spec.dim()));
}

template <class X>
void check_sample(const LossSpec& spec, const Eigen::MatrixBase<X>& x, int y) {
  if (x.size() != spec.feature_dim)
    throw ConfigError("sample has " + std::to_string(x.size()) +
                      " features, expected " +
                      std::to_string(spec.feature_dim));
  if (y < 0 || y >= spec.num_classes)
    throw ConfigError("label " + std::to_string(y) + " out of range");
}

// Column view of a feature vector given either as a column or as a row.
template <class X>
auto as_column(const Eigen::MatrixBase<X>& x) {
  if constexpr (X::ColsAtCompileTime == 1) {
    return x.derived();
  } else {
    return x.derived().transpose();
  }
}

inline ConstWeights weights(const LossSpec& spec, const Vector& theta) {
  return ConstWeights(theta.data(), spec.num_classes, spec.feature_dim + 1);
}

template <class X>
Vector logits(const LossSpec& spec, const Vector& theta,
              const Eigen::MatrixBase<X>& x) {
  const auto w = weights(spec, theta);
  const int s = spec.feature_dim;
  return w.leftCols(s) * as_column(x) + w.col(s);
}

// In-place, max-shifted softmax.
inline void softmax_inplace(Vector& z) {
  const double m = z.maxCoeff();
  z = (z.array() - m).exp();
  z /= z.sum();
}

}  // namespace detail

template <class X>
Vector predict_proba(const LossSpec& spec, const Vector& theta,
                     const Eigen::MatrixBase<X>& x) {
  Vector p = detail::logits(spec, theta, x);
  detail::softmax_inplace(p);
  return p;
}

template <class X>
double sample_loss(const LossSpec& spec, const Vector& theta,
                   const Eigen::MatrixBase<X>& x, int y) {
  detail::check_theta(spec, theta);
  detail::check_sample(spec, x, y);
  const Vector z = detail::logits(spec, theta, x);
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return (lse - z[y]) + 0.5 * spec.lambda * theta.squaredNorm();
}

inline double sample_loss(const LossSpec& spec, const Vector& theta,
                          const Sample& xi) {
  return sample_loss(spec, theta, xi.features, xi.label);
}

// out += w * grad_theta sample_loss(theta, (x, y)).
template <class X>
void accumulate_sample_grad(const LossSpec& spec, const Vector& theta,
                            const Eigen::MatrixBase<X>& x, int y, double w,
                            Vector& out) {
  Vector r = predict_proba(spec, theta, x);
  r[y] -= 1.0;
  r *= w;
  const int s = spec.feature_dim;
  detail::Weights g(out.data(), spec.num_classes, s + 1);
  g.leftCols(s).noalias() += r * detail::as_column(x).transpose();
  g.col(s) += r;
  out.noalias() += (w * spec.lambda) * theta;
}

inline Vector sample_grad(const LossSpec& spec, const Vector& theta,
                          const Sample& xi) {
  detail::check_theta(spec, theta);
  detail::check_sample(spec, xi.features, xi.label);
  Vector g = Vector::Zero(theta.size());
  accumulate_sample_grad(spec, theta, xi.features, xi.label, 1.0, g);
  return g;
}

// Mean of sample_grad over an explicit list of samples.
inline Vector batch_grad(const LossSpec& spec, const Vector& theta,
                         std::span<const Sample> samples) {
  if (samples.empty()) throw UsageError("batch_grad: empty batch");
  detail::check_theta(spec, theta);
  Vector g = Vector::Zero(theta.size());
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const Sample& xi : samples) {
    detail::check_sample(spec, xi.features, xi.label);
    accumulate_sample_grad(spec, theta, xi.features, xi.label, w, g);
  }
  return g;
}

namespace detail {

// Row-wise softmax probabilities for every sample: n x C.
inline Eigen::MatrixXd probabilities(const LossSpec& spec, const Vector& theta,
                                     const Dataset& data) {
  const auto w = weights(spec, theta);
  const int s = spec.feature_dim;
  Eigen::MatrixXd z = data.features() * w.leftCols(s).transpose();
  z.rowwise() += w.col(s).transpose();
  const Eigen::VectorXd m = z.rowwise().maxCoeff();
  z = (z.colwise() - m).array().exp();
  const Eigen::VectorXd norm = z.rowwise().sum();
  z.array().colwise() /= norm.array();
  return z;
}

inline void check_dataset(const LossSpec& spec, const Dataset& data) {
  if (data.feature_dim() != spec.feature_dim)
    throw ConfigError("dataset has " + std::to_string(data.feature_dim()) +
                      " features, expected " +
                      std::to_string(spec.feature_dim));
  if (data.num_classes() > spec.num_classes)
    throw ConfigError("dataset has more classes than the model");
}

}  // namespace detail

// Mean gradient over a dataset, evaluated with dense matrix products.
inline Vector batch_grad(const LossSpec& spec, const Vector& theta,
                         const Dataset& data) {
  if (data.empty()) throw UsageError("batch_grad: empty batch");
  detail::check_theta(spec, theta);
  detail::check_dataset(spec, data);
  Eigen::MatrixXd r = detail::probabilities(spec, theta, data);
  for (std::size_t i = 0; i < data.size(); ++i)
    r(static_cast<Eigen::Index>(i), data.label(i)) -= 1.0;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  const int s = spec.feature_dim;
  Vector g = spec.lambda * theta;
  detail::Weights gw(g.data(), spec.num_classes, s + 1);
  gw.leftCols(s).noalias() += inv_n * (r.transpose() * data.features());
  gw.col(s) += inv_n * r.colwise().sum().transpose();
  return g;
}

inline double mean_loss(const LossSpec& spec, const Vector& theta,
                        const Dataset& data) {
  if (data.empty()) throw UsageError("mean_loss: empty dataset");
  detail::check_theta(spec, theta);
  detail::check_dataset(spec, data);
  const auto w = detail::weights(spec, theta);
  const int s = spec.feature_dim;
  Eigen::MatrixXd z = data.features() * w.leftCols(s).transpose();
  z.rowwise() += w.col(s).transpose();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    total += lse - row(data.label(i));
  }
  return total / static_cast<double>(data.size()) +
         0.5 * spec.lambda * theta.squaredNorm();
}

// Mean loss of theta minus mean loss of the reference model on `eval`.
// Reported as-is; it can be slightly negative when eval is not the set
// theta_ref was fitted on.
inline double excess_risk(const LossSpec& spec, const Vector& theta,
                          const Dataset& eval, const Vector& theta_ref) {
  if (eval.empty()) throw UsageError("excess_risk: empty evaluation set");
  return mean_loss(spec, theta, eval) - mean_loss(spec, theta_ref, eval);
}

// Adapter exposing the logistic model through the SampleLoss concept.
class LogisticLoss {
 public:
  using data_type = Dataset;

  explicit LogisticLoss(LossSpec spec) : spec_(spec) {}

  const LossSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim(); }
  double mu() const { return spec_.mu; }
  double beta() const { return spec_.beta_bound; }

  void accumulate_sample_grad(const Vector& theta, const Dataset& data,
                              std::size_t i, double w, Vector& out) const {
    vru::accumulate_sample_grad(spec_, theta, data.row(i), data.label(i), w,
                                out);
  }

  Vector batch_grad(const Vector& theta, const Dataset& data) const {
    return vru::batch_grad(spec_, theta, data);
  }

  double loss(const Vector& theta, const Dataset& data) const {
    return mean_loss(spec_, theta, data);
  }

 private:
  LossSpec spec_;
};

static_assert(SampleLoss<LogisticLoss>);

}  // namespace vru
