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
#include <optional>
#include <utility>

#include "vru/budget.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/logistic.hpp"
#include "vru/loss.hpp"
#include "vru/privacy.hpp"
#include "vru/projection.hpp"
#include "vru/psgd.hpp"
#include "vru/rng.hpp"
#include "vru/schedule.hpp"

namespace vru {

// Variance-reduced unlearning.
//
// Starting from the optimum theta* of the full training set, projected SGD
// runs on the estimator
//
//   g(theta, xi_r) = grad l(theta, xi_r) - grad l(theta*, xi_r)
//                    - ratio * grad L(theta*, D_f),    ratio = r_f / (1 - r_f)
//
// whose expectation over xi_r equals grad L(theta, D_r) whenever theta* is
// stationary for the full objective. Iterates are projected onto
// B(theta*, ratio * |grad L(theta*, D_f)| / mu), which contains theta*_r. A
// Gaussian perturbation of scale ratio * nu_T * kappa is added at the end.
//
// Two estimator modes:
//  * empirical:   the forget gradient is one full-batch mean at theta*,
//                 computed once (|D_f| units).
//  * theoretical: a fresh forget sample per retain sample, 1 unit each.

enum class VruMode { empirical, theoretical };

// How the final noise scale is set.
//  * certified: sigma = ratio * nu_T * kappa, nu_T from the closed form.
//  * unit:      sigma = ratio * kappa (nu_T taken as 1).
//  * measured:  sigma = kappa * sensitivity, sensitivity supplied by caller.
enum class NoiseCalibration { certified, unit, measured };

struct VruConfig {
  VruMode mode = VruMode::empirical;
  bool projection = true;
  std::optional<StepSchedule> schedule;  // defaults to 1 / (mu t)
  std::size_t batch_size = 1;
  std::int64_t steps = kUntilBudget;     // T; the budget may stop it sooner
  std::optional<std::int64_t> budget;
  NoiseCalibration calibration = NoiseCalibration::certified;
  double sensitivity = 0.0;
  // Theoretical mode only: a known Lipschitz constant. When absent, the
  // forget-gradient norm is used (and paid for) as in empirical mode.
  std::optional<double> lipschitz;
};

struct VruResult {
  Vector pre_noise;
  Vector post_noise;
  double noise_sigma = 0.0;
  std::int64_t budget_used = 0;
  std::int64_t forget_units = 0;
  std::int64_t steps = 0;
  bool truncated = false;
  double forget_grad_norm = 0.0;
  VruSchedule schedule;  // nu is only filled in for certified calibration
  double reported_epsilon = 0.0;
  double reported_delta = 0.0;
};

// The stream tag used for the final perturbation. Noise never shares draws
// with the optimization, so one pre-noise model can be noised at several
// kappas and paired runs see identical Z.
inline constexpr std::string_view kVruNoiseTag = "vru/noise";

inline Vector noise_model(const Vector& theta, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw UsageError("noise_model: sigma must be >= 0");
  if (sigma == 0.0) return theta;
  return theta + sigma * rng.normal_vector(static_cast<std::size_t>(theta.size()));
}

// Single-sample estimator with a precomputed forget gradient at theta*.
template <SampleLoss L>
Vector vru_gradient(const L& loss, const Vector& theta, const Vector& theta_star,
                    const typename L::data_type& retain, std::size_t i,
                    const Vector& forget_grad_at_star, double ratio) {
  if (theta.size() != theta_star.size() ||
      theta.size() != forget_grad_at_star.size())
    throw ConfigError("vru_gradient: dimension mismatch");
  Vector g = -ratio * forget_grad_at_star;
  loss.accumulate_sample_grad(theta, retain, i, 1.0, g);
  loss.accumulate_sample_grad(theta_star, retain, i, -1.0, g);
  return g;
}

// Single-sample estimator with a stochastic forget sample.
template <SampleLoss L>
Vector vru_gradient(const L& loss, const Vector& theta, const Vector& theta_star,
                    const typename L::data_type& retain, std::size_t i,
                    const typename L::data_type& forget, std::size_t j,
                    double ratio) {
  if (theta.size() != theta_star.size())
    throw ConfigError("vru_gradient: dimension mismatch");
  Vector g = Vector::Zero(theta.size());
  loss.accumulate_sample_grad(theta, retain, i, 1.0, g);
  loss.accumulate_sample_grad(theta_star, retain, i, -1.0, g);
  loss.accumulate_sample_grad(theta_star, forget, j, -ratio, g);
  return g;
}

// GradientOracle for psgd(). Per batch element: one retain index, then (in
// theoretical mode) one forget index, both uniform with replacement.
template <SampleLoss L>
class VruGradient {
 public:
  using data_type = typename L::data_type;

  VruGradient(const L& loss, const data_type& retain, const data_type& forget,
              const Vector& theta_star, const Vector& forget_grad, double ratio,
              VruMode mode)
      : loss_(loss),
        retain_(retain),
        forget_(forget),
        theta_star_(theta_star),
        forget_grad_(forget_grad),
        ratio_(ratio),
        mode_(mode) {}

  std::int64_t units_per_sample() const {
    return mode_ == VruMode::empirical ? 2 : 3;
  }

  void charge(BudgetMeter& meter, std::size_t batch) const {
    const auto b = static_cast<std::int64_t>(batch);
    meter.charge(2 * b, Pool::retain);
    if (mode_ == VruMode::theoretical) meter.charge(b, Pool::forget);
  }

  void gradient(const Vector& theta, std::size_t batch, RngStream& rng,
                Vector& out) const {
    const double w = 1.0 / static_cast<double>(batch);
    for (std::size_t k = 0; k < batch; ++k) {
      const std::size_t i = rng.uniform_index(retain_.size());
      loss_.accumulate_sample_grad(theta, retain_, i, w, out);
      loss_.accumulate_sample_grad(theta_star_, retain_, i, -w, out);
      if (mode_ == VruMode::theoretical) {
        const std::size_t j = rng.uniform_index(forget_.size());
        loss_.accumulate_sample_grad(theta_star_, forget_, j, -w * ratio_, out);
      }
    }
    if (mode_ == VruMode::empirical) out.noalias() -= ratio_ * forget_grad_;
  }

 private:
  const L& loss_;
  const data_type& retain_;
  const data_type& forget_;
  const Vector& theta_star_;
  const Vector& forget_grad_;
  double ratio_;
  VruMode mode_;
};

// Full VRU run. Optimization draws come from `rng` directly; the final noise
// comes from rng.split(kVruNoiseTag).
template <SampleLoss L, class Observer = NoObserver>
VruResult vru_run(const L& loss, const typename L::data_type& retain,
                  const typename L::data_type& forget, double r_f,
                  const Vector& theta_star, const PrivacyBudget& privacy,
                  const VruConfig& cfg, RngStream& rng,
                  Observer&& observe = {}) {
  if (!(r_f > 0.0 && r_f < 1.0)) throw UsageError("vru_run: r_f must lie in (0, 1)");
  if (retain.size() == 0) throw UsageError("vru_run: empty retain set");
  if (static_cast<std::size_t>(theta_star.size()) != loss.dim())
    throw ConfigError("vru_run: theta* has the wrong dimension");
  if (!cfg.budget && cfg.steps == kUntilBudget)
    throw UsageError("vru_run: set a step count or a budget");
  if (cfg.budget && *cfg.budget <= 0)
    throw UsageError("vru_run: budget must be positive");

  const double ratio = r_f / (1.0 - r_f);
  BudgetMeter meter =
      cfg.budget ? BudgetMeter(*cfg.budget) : BudgetMeter::unlimited();

  VruResult result;
  Vector forget_grad = Vector::Zero(theta_star.size());
  const bool need_anchor =
      cfg.mode == VruMode::empirical || !cfg.lipschitz.has_value();
  if (need_anchor) {
    if (forget.size() == 0) throw UsageError("vru_run: empty forget set");
    if (!meter.charge(static_cast<std::int64_t>(forget.size()), Pool::forget))
      throw UsageError("vru_run: budget smaller than the forget-gradient anchor");
    forget_grad = loss.batch_grad(theta_star, forget);
  } else if (forget.size() == 0) {
    throw UsageError("vru_run: empty forget set");
  }
  result.forget_grad_norm = forget_grad.norm();
  const double grad_scale =
      cfg.lipschitz && cfg.mode == VruMode::theoretical ? *cfg.lipschitz
                                                        : result.forget_grad_norm;
  result.schedule.ratio = ratio;
  result.schedule.radius = ratio * grad_scale / loss.mu();

  const StepSchedule schedule =
      cfg.schedule.value_or(StepSchedule::inverse_mu_t(loss.mu()));
  VruGradient<L> oracle(loss, retain, forget, theta_star, forget_grad, ratio,
                        cfg.mode);
  PsgdResult run = cfg.projection
      ? psgd(oracle, theta_star, schedule, cfg.steps, cfg.batch_size,
             BallProjector{theta_star, result.schedule.radius}, meter, rng,
             std::forward<Observer>(observe))
      : psgd(oracle, theta_star, schedule, cfg.steps, cfg.batch_size,
             IdentityProjector{}, meter, rng, std::forward<Observer>(observe));

  result.steps = run.steps;
  result.truncated = run.truncated && cfg.steps != kUntilBudget;
  result.schedule.steps = run.steps;
  result.pre_noise = std::move(run.theta);

  switch (cfg.calibration) {
    case NoiseCalibration::certified:
      if (privacy.kappa == 0.0) {
        result.noise_sigma = 0.0;
        break;
      }
      if (run.steps < 2)
        throw UsageError("vru_run: certified noise needs at least 2 steps");
      result.schedule.h = h_of(run.steps, privacy.delta);
      result.schedule.nu = nu_T(run.steps, privacy.delta, grad_scale,
                                loss.mu(), loss.beta() / loss.mu());
      result.noise_sigma = ratio * result.schedule.nu * privacy.kappa;
      break;
    case NoiseCalibration::unit:
      result.schedule.nu = 1.0;
      result.noise_sigma = ratio * privacy.kappa;
      break;
    case NoiseCalibration::measured:
      if (cfg.sensitivity < 0.0)
        throw UsageError("vru_run: measured sensitivity must be >= 0");
      result.noise_sigma = privacy.kappa * cfg.sensitivity;
      break;
  }
  RngStream noise_rng = rng.split(kVruNoiseTag);
  result.post_noise = noise_model(result.pre_noise, result.noise_sigma, noise_rng);
  result.budget_used = meter.used();
  result.forget_units = meter.used_by(Pool::forget);
  result.reported_epsilon = privacy.epsilon;
  result.reported_delta =
      privacy.sensitivity_failure_delta() + privacy.mechanism_delta();
  return result;
}

template <class Observer = NoObserver>
VruResult vru_run(const LogisticLoss& loss, const DataSplit& split,
                  const Vector& theta_star, const PrivacyBudget& privacy,
                  const VruConfig& cfg, RngStream& rng, Observer&& observe = {}) {
  return vru_run(loss, split.retain, split.forget, split.r_f, theta_star,
                 privacy, cfg, rng, std::forward<Observer>(observe));
}

}  // namespace vru
