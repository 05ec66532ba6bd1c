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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vru/budget.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/logistic.hpp"
#include "vru/loss.hpp"
#include "vru/psgd.hpp"
#include "vru/retrain.hpp"
#include "vru/rng.hpp"
#include "vru/schedule.hpp"
#include "vru/unlearn.hpp"

namespace vru {

enum class BaselineMethod { nft, fine_tune, neggrad_plus, scrub };

inline std::string_view to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::nft: return "nft";
    case BaselineMethod::fine_tune: return "fine_tune";
    case BaselineMethod::neggrad_plus: return "neggrad_plus";
    case BaselineMethod::scrub: return "scrub";
  }
  return "?";
}

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::fine_tune;
  double lr = 5e-3;
  double lr_decay = 0.8;
  double alpha = 0.0;  // ascent weight, NegGrad+ and SCRUB only
  std::optional<double> sensitivity;  // NFT only
  double kl_weight = 1.0;             // SCRUB min-step KL weight
  std::size_t batch_size = 8;
  bool noise_first = true;  // NFT; false perturbs after fine-tuning

  static BaselineConfig defaults(BaselineMethod m) {
    BaselineConfig c;
    c.method = m;
    switch (m) {
      case BaselineMethod::nft: c.lr = 0.3; c.lr_decay = 0.8; break;
      case BaselineMethod::fine_tune: c.lr = 5e-3; c.lr_decay = 0.8; break;
      case BaselineMethod::neggrad_plus:
        c.lr = 3e-3; c.lr_decay = 0.7; c.alpha = 5e-3;
        break;
      case BaselineMethod::scrub:
        c.lr = 5e-3; c.lr_decay = 0.8; c.alpha = 5e-3;
        break;
    }
    return c;
  }

  bool uses_ascent() const {
    return method == BaselineMethod::neggrad_plus ||
           method == BaselineMethod::scrub;
  }

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("baseline: lr must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
      throw ConfigError("baseline: lr_decay must lie in (0, 1]");
    if (alpha < 0.0) throw ConfigError("baseline: alpha must be >= 0");
    if (alpha != 0.0 && !uses_ascent())
      throw ConfigError(std::string("baseline: alpha is not used by ") +
                        std::string(to_string(method)));
    if (sensitivity && *sensitivity < 0.0)
      throw ConfigError("baseline: sensitivity must be >= 0");
    if (kl_weight < 0.0) throw ConfigError("baseline: kl_weight must be >= 0");
    if (batch_size == 0) throw ConfigError("baseline: batch size must be >= 1");
  }

  StepSchedule schedule(std::size_t n_retain) const {
    const auto spe = static_cast<std::int64_t>((n_retain + batch_size - 1) / batch_size);
    return StepSchedule::decayed(lr, lr_decay, spe);
  }
};

enum class StepKind : char { ascent = 'a', descent = 'd' };

struct UnlearnOutcome {
  Vector theta;
  std::int64_t budget_used = 0;
  std::int64_t forget_units = 0;
  std::int64_t steps = 0;
  std::vector<StepKind> trace;
};

namespace detail {

template <SampleLoss L>
void minibatch_grad(const L& loss, const Vector& theta,
                    const typename L::data_type& data, std::size_t m,
                    RngStream& rng, Vector& out) {
  out.setZero();
  const double w = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k)
    loss.accumulate_sample_grad(theta, data, rng.uniform_index(data.size()), w, out);
}

inline void check_budget(std::int64_t budget) {
  if (budget < 0) throw UsageError("baseline: negative budget");
}

}  // namespace detail

// SGD on the retain set from theta_start, lr decayed once per retain epoch.
// A budget below one batch returns theta_start untouched.
template <SampleLoss L>
UnlearnOutcome fine_tune(const L& loss, const typename L::data_type& retain,
                         const Vector& theta_start, std::int64_t budget,
                         const BaselineConfig& cfg, RngStream& rng) {
  cfg.validate();
  detail::check_budget(budget);
  if (budget < static_cast<std::int64_t>(cfg.batch_size))
    return UnlearnOutcome{theta_start, 0, 0, 0, {}};
  TrainResult r = sgd(loss, retain, theta_start, cfg.schedule(retain.size()),
                      cfg.batch_size, budget, rng);
  UnlearnOutcome out{std::move(r.theta), r.budget_used, 0, r.steps, {}};
  out.trace.assign(static_cast<std::size_t>(r.steps), StepKind::descent);
  return out;
}

// Noise and fine-tune. The perturbation kappa * sensitivity * Z is drawn from
// rng.split("nft/noise"), so the fine-tuning draws match fine_tune().
template <SampleLoss L>
UnlearnOutcome nft(const L& loss, const typename L::data_type& retain,
                   const Vector& theta_star, std::int64_t budget,
                   const PrivacyBudget& privacy, const BaselineConfig& cfg,
                   RngStream& rng) {
  cfg.validate();
  if (!cfg.sensitivity) throw UsageError("nft: sensitivity is required");
  const double sigma = privacy.kappa * *cfg.sensitivity;
  RngStream noise_rng = rng.split("nft/noise");
  if (cfg.noise_first) {
    const Vector noisy = noise_model(theta_star, sigma, noise_rng);
    return fine_tune(loss, retain, noisy, budget, cfg, rng);
  }
  UnlearnOutcome out = fine_tune(loss, retain, theta_star, budget, cfg, rng);
  out.theta = noise_model(out.theta, sigma, noise_rng);
  return out;
}

// NegGrad+: ascent on a forget batch (theta += lr * alpha * g_f), then descent
// on a retain batch (theta -= lr * g_r), repeated. The learning rate follows
// the retain-epoch schedule. Near the end of the budget the ascent batch
// shrinks first so the run always finishes on a descent step.
template <SampleLoss L>
UnlearnOutcome neggrad_plus(const L& loss, const typename L::data_type& retain,
                            const typename L::data_type& forget,
                            const Vector& theta_start, std::int64_t budget,
                            const BaselineConfig& cfg, RngStream& rng) {
  cfg.validate();
  detail::check_budget(budget);
  if (retain.size() == 0 || forget.size() == 0)
    throw UsageError("neggrad_plus: empty retain or forget set");
  const auto b = static_cast<std::int64_t>(cfg.batch_size);
  const StepSchedule schedule = cfg.schedule(retain.size());
  RngStream forget_rng = rng.split("neggrad/forget");
  BudgetMeter meter(budget);
  UnlearnOutcome out{theta_start, 0, 0, 0, {}};
  Vector& theta = out.theta;
  Vector g(theta.size());
  std::int64_t t = 0;
  while (meter.remaining() > 0) {
    const std::int64_t rem = meter.remaining();
    const double lr = schedule(t + 1);
    const std::int64_t ascent = rem >= 2 * b ? b : (rem > b ? rem - b : 0);
    if (ascent > 0) {
      meter.charge(ascent, Pool::forget);
      detail::minibatch_grad(loss, theta, forget, static_cast<std::size_t>(ascent),
                             forget_rng, g);
      theta.noalias() += (lr * cfg.alpha) * g;
      out.trace.push_back(StepKind::ascent);
    }
    const std::int64_t descent = std::min(b, meter.remaining());
    meter.charge(descent, Pool::retain);
    detail::minibatch_grad(loss, theta, retain, static_cast<std::size_t>(descent),
                           rng, g);
    theta.noalias() -= lr * g;
    out.trace.push_back(StepKind::descent);
    ++t;
    if (!theta.allFinite())
      throw RunError("neggrad_plus: non-finite iterate", static_cast<std::int64_t>(out.trace.size()));
  }
  out.budget_used = meter.used();
  out.forget_units = meter.used_by(Pool::forget);
  out.steps = static_cast<std::int64_t>(out.trace.size());
  return out;
}

// KL(p || q) over a discrete distribution; terms with p_i = 0 contribute 0.
inline double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw UsageError("kl_divergence: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  return kl;
}

// KL(teacher || student) between the two models' predictive distributions.
template <class X>
double scrub_kl(const LossSpec& spec, const Vector& student,
                const Vector& teacher, const Eigen::MatrixBase<X>& x) {
  return kl_divergence(predict_proba(spec, teacher, x),
                       predict_proba(spec, student, x));
}

// out += w * grad_student KL(teacher || student) at x. With respect to the
// student logits this gradient is p_student - p_teacher.
template <class X>
void accumulate_kl_grad(const LossSpec& spec, const Vector& student,
                        const Vector& teacher_probs,
                        const Eigen::MatrixBase<X>& x, double w, Vector& out) {
  Vector r = predict_proba(spec, student, x) - teacher_probs;
  r *= w;
  const int s = spec.feature_dim;
  detail::Weights g(out.data(), spec.num_classes, s + 1);
  g.leftCols(s).noalias() += r * detail::as_column(x).transpose();
  g.col(s) += r;
}

// SCRUB with theta_start as the teacher. Each epoch runs up to
// ceil(|D_f| / b) max-steps on forget batches, ascending alpha * KL, then
// ceil(|D_r| / b) min-steps on retain batches, descending
// kl_weight * KL + cross-entropy. A max-step is only taken while at least one
// retain sample remains affordable afterwards, so the run ends on a min-step.
// With alpha = 0 the max-steps are no-ops and are skipped.
inline UnlearnOutcome scrub(const LogisticLoss& loss, const Dataset& retain,
                            const Dataset& forget, const Vector& theta_start,
                            std::int64_t budget, const BaselineConfig& cfg,
                            RngStream& rng) {
  cfg.validate();
  detail::check_budget(budget);
  if (retain.size() == 0 || forget.size() == 0)
    throw UsageError("scrub: empty retain or forget set");
  const LossSpec& spec = loss.spec();
  const auto b = static_cast<std::int64_t>(cfg.batch_size);
  const auto retain_steps = static_cast<std::int64_t>((retain.size() + cfg.batch_size - 1) / cfg.batch_size);
  const auto forget_steps = static_cast<std::int64_t>((forget.size() + cfg.batch_size - 1) / cfg.batch_size);
  const StepSchedule schedule = cfg.schedule(retain.size());
  const Eigen::MatrixXd teacher_retain = detail::probabilities(spec, theta_start, retain);
  const Eigen::MatrixXd teacher_forget = detail::probabilities(spec, theta_start, forget);
  RngStream forget_rng = rng.split("scrub/forget");
  BudgetMeter meter(budget);
  UnlearnOutcome out{theta_start, 0, 0, 0, {}};
  Vector& theta = out.theta;
  Vector g(theta.size());
  std::int64_t t = 0;
  while (meter.remaining() > 0) {
    for (std::int64_t k = 0; cfg.alpha > 0.0 && k < forget_steps && meter.remaining() > b; ++k) {
      meter.charge(b, Pool::forget);
      g.setZero();
      const double w = 1.0 / static_cast<double>(b);
      for (std::int64_t j = 0; j < b; ++j) {
        const std::size_t i = forget_rng.uniform_index(forget.size());
        accumulate_kl_grad(spec, theta, teacher_forget.row(static_cast<Eigen::Index>(i)).transpose(),
                           forget.row(i), w, g);
      }
      theta.noalias() += (schedule(t + 1) * cfg.alpha) * g;
      out.trace.push_back(StepKind::ascent);
    }
    for (std::int64_t k = 0; k < retain_steps && meter.remaining() > 0; ++k) {
      const std::int64_t m = std::min(b, meter.remaining());
      meter.charge(m, Pool::retain);
      g.setZero();
      const double w = 1.0 / static_cast<double>(m);
      for (std::int64_t j = 0; j < m; ++j) {
        const std::size_t i = rng.uniform_index(retain.size());
        loss.accumulate_sample_grad(theta, retain, i, w, g);
        if (cfg.kl_weight != 0.0)
          accumulate_kl_grad(spec, theta, teacher_retain.row(static_cast<Eigen::Index>(i)).transpose(),
                             retain.row(i), w * cfg.kl_weight, g);
      }
      theta.noalias() -= schedule(++t) * g;
      out.trace.push_back(StepKind::descent);
    }
    if (!theta.allFinite())
      throw RunError("scrub: non-finite iterate", static_cast<std::int64_t>(out.trace.size()));
  }
  out.budget_used = meter.used();
  out.forget_units = meter.used_by(Pool::forget);
  out.steps = static_cast<std::int64_t>(out.trace.size());
  return out;
}

// Largest distance to theta*_r over n_probes runs of a pre-noise pipeline.
// Probe k receives rng.split(k), so a smaller probe count is always a prefix
// of a larger one.
template <class Pipeline>
double measure_sensitivity(Pipeline&& pre_noise, const Vector& theta_r_star,
                           int n_probes, const RngStream& rng) {
  if (n_probes < 2) throw UsageError("measure_sensitivity: n_probes must be >= 2");
  double worst = 0.0;
  for (int k = 0; k < n_probes; ++k) {
    RngStream probe = rng.split(static_cast<std::uint64_t>(k));
    const Vector theta = pre_noise(probe);
    worst = std::max(worst, (theta - theta_r_star).norm());
  }
  return worst;
}

}  // namespace vru
