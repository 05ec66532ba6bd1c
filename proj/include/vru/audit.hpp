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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vru/budget.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/logistic.hpp"
#include "vru/loss.hpp"
#include "vru/rng.hpp"

namespace vru {

// Per-sample membership statistic.
//  * logit: ln p_y - ln(1 - p_y), p_y clamped to [1e-12, 1 - 1e-12].
//  * loss:  ln p_y (negated cross-entropy without the penalty term).
enum class ScoreKind { logit, loss };

inline constexpr double kScoreClamp = 1e-12;

template <class X>
double mia_score(const LossSpec& spec, const Vector& theta,
                 const Eigen::MatrixBase<X>& x, int y,
                 ScoreKind kind = ScoreKind::logit) {
  detail::check_theta(spec, theta);
  detail::check_sample(spec, x, y);
  const double p =
      std::clamp(predict_proba(spec, theta, x)[y], kScoreClamp, 1.0 - kScoreClamp);
  if (kind == ScoreKind::loss) return std::log(p);
  return std::log(p) - std::log1p(-p);
}

inline double mia_score(const LossSpec& spec, const Vector& theta,
                        const Sample& xi, ScoreKind kind = ScoreKind::logit) {
  return mia_score(spec, theta, xi.features, xi.label, kind);
}

struct AttackSet {
  Dataset members;     // the forget set
  Dataset nonmembers;  // |forget| test samples
  std::vector<std::size_t> nonmember_index;  // positions within the test set

  std::size_t size() const { return members.size() + nonmembers.size(); }
};

// Nonmembers are drawn without replacement from the test set. Callers pass a
// stream reserved for this draw.
inline AttackSet make_attack_set(const DataSplit& split, RngStream& rng) {
  const std::size_t k = split.forget.size();
  if (k == 0) throw UsageError("attack set: empty forget set");
  if (split.test.size() < k)
    throw UsageError("attack set: test set smaller than the forget set");
  std::vector<std::size_t> pool(split.test.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  detail::shuffle_prefix(pool, k, rng);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return AttackSet{split.forget, split.test.subset(pool), pool};
}

// An unlearning method as seen by the auditor: unlearn split.forget from a
// model trained on split.train().
using Unlearner =
    std::function<Vector(const DataSplit&, const Vector& theta_star, RngStream&)>;

struct ShadowOptions {
  double tol = 1e-8;
  std::int64_t max_iterations = 1'000'000;
};

// Shadow k trains on a bootstrap resample R_k of the retain set. Its target
// model is trained on R_k plus every attack sample and then unlearns the
// attack samples; its reference model is trained on R_k alone.
struct ShadowPool {
  std::vector<DataSplit> splits;    // retain = R_k, forget = attack samples
  std::vector<Vector> originals;    // optimum on R_k plus attack samples
  std::vector<Vector> references;   // optimum on R_k
  std::vector<std::int64_t> reference_forget_units;
  std::vector<std::int64_t> reference_retain_units;

  int count() const { return static_cast<int>(references.size()); }
};

struct ShadowSet {
  std::vector<Vector> targets;
  std::vector<Vector> references;
  int count = 0;
  std::vector<std::int64_t> reference_forget_units;
};

namespace detail {

inline Dataset bootstrap(const Dataset& data, RngStream& rng) {
  std::vector<std::size_t> idx(data.size());
  for (auto& i : idx) i = rng.uniform_index(data.size());
  return data.subset(idx);
}

// Retain-only training with every full-gradient evaluation booked on a meter.
inline Vector metered_optimum(const LogisticLoss& loss, const Dataset& retain,
                              const Vector& warm_start,
                              const ShadowOptions& opts, BudgetMeter& meter) {
  OptimumReport r = train_to_optimum_report(loss, retain, opts.tol, warm_start,
                                            opts.max_iterations);
  meter.charge((r.iterations + 1) * static_cast<std::int64_t>(retain.size()),
               Pool::retain);
  return std::move(r.theta);
}

}  // namespace detail

inline ShadowPool prepare_shadows(const LogisticLoss& loss,
                                  const DataSplit& split,
                                  const AttackSet& attack, int count,
                                  const Vector& warm_start,
                                  const RngStream& rng,
                                  const ShadowOptions& opts = {}) {
  if (count < 2) throw UsageError("shadows: count must be >= 2");
  const Dataset attacked = attack.members.concat(attack.nonmembers);
  ShadowPool pool;
  for (int k = 0; k < count; ++k) {
    try {
      RngStream boot_rng = rng.split(static_cast<std::uint64_t>(k)).split("bootstrap");
      DataSplit s;
      s.retain = detail::bootstrap(split.retain, boot_rng);
      s.forget = attacked;
      s.test = split.test;
      s.r_f = static_cast<double>(attacked.size()) /
              static_cast<double>(attacked.size() + s.retain.size());
      const Dataset full = s.retain.concat(s.forget);
      pool.originals.push_back(
          train_to_optimum_report(loss, full, opts.tol, warm_start, opts.max_iterations).theta);
      BudgetMeter meter = BudgetMeter::unlimited();
      pool.references.push_back(
          detail::metered_optimum(loss, s.retain, warm_start, opts, meter));
      pool.reference_forget_units.push_back(meter.used_by(Pool::forget));
      pool.reference_retain_units.push_back(meter.used_by(Pool::retain));
      pool.splits.push_back(std::move(s));
    } catch (const Error& e) {
      throw RunError("shadow " + std::to_string(k) + ": " + e.what(), k);
    }
  }
  return pool;
}

inline ShadowSet unlearn_shadows(const ShadowPool& pool, const Unlearner& unlearn,
                                 const RngStream& rng) {
  ShadowSet set;
  set.count = pool.count();
  set.references = pool.references;
  set.reference_forget_units = pool.reference_forget_units;
  for (int k = 0; k < pool.count(); ++k) {
    try {
      RngStream r = rng.split(static_cast<std::uint64_t>(k)).split("unlearn");
      set.targets.push_back(unlearn(pool.splits[static_cast<std::size_t>(k)],
                                    pool.originals[static_cast<std::size_t>(k)], r));
    } catch (const Error& e) {
      throw RunError("shadow " + std::to_string(k) + ": " + e.what(), k);
    }
  }
  return set;
}

inline ShadowSet build_shadows(const LogisticLoss& loss, const DataSplit& split,
                               const AttackSet& attack, const Unlearner& unlearn,
                               int count, const Vector& warm_start,
                               const RngStream& rng,
                               const ShadowOptions& opts = {}) {
  return unlearn_shadows(
      prepare_shadows(loss, split, attack, count, warm_start, rng, opts), unlearn, rng);
}

struct SampleScore {
  double audited = 0.0;
  double member_mean = 0.0;
  double nonmember_mean = 0.0;
  double pooled_std = 0.0;
  bool is_member = false;
  bool predicted_member = false;
};

struct MiaReport {
  double accuracy = 0.0;
  std::vector<SampleScore> per_sample;  // members first, then nonmembers
  std::size_t n_attacked = 0;
  bool unstable = false;  // fewer than 5 members
};

// Shadow scores per attacked sample: the member hypothesis (target shadows)
// and the nonmember hypothesis (reference shadows).
struct ScoreTable {
  std::vector<std::vector<double>> member_hypothesis;
  std::vector<std::vector<double>> nonmember_hypothesis;
  std::vector<double> audited;
  std::vector<bool> is_member;
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr std::size_t kMinStableAttack = 5;

namespace detail {

inline void mean_var(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
}

}  // namespace detail

// Gaussian likelihood test with a shared (pooled) variance per sample. With
// equal variances the equal-likelihood threshold is the midpoint of the two
// means; ties go to the nonmember hypothesis.
inline MiaReport ulira_scores(const ScoreTable& table) {
  const std::size_t n = table.audited.size();
  if (table.member_hypothesis.size() != n ||
      table.nonmember_hypothesis.size() != n || table.is_member.size() != n)
    throw UsageError("ulira: score table size mismatch");
  if (n == 0) throw UsageError("ulira: nothing to attack");
  MiaReport report;
  report.n_attacked = n;
  std::size_t correct = 0;
  std::size_t members = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& in = table.member_hypothesis[i];
    const auto& out = table.nonmember_hypothesis[i];
    if (in.size() < 2 || out.size() < 2)
      throw UsageError("ulira: need at least 2 shadows per side");
    SampleScore s;
    double var_in = 0.0, var_out = 0.0;
    detail::mean_var(in, s.member_mean, var_in);
    detail::mean_var(out, s.nonmember_mean, var_out);
    s.pooled_std = std::sqrt(std::max(0.5 * (var_in + var_out), kVarianceFloor));
    s.audited = table.audited[i];
    s.is_member = table.is_member[i];
    const double z_in = (s.audited - s.member_mean) / s.pooled_std;
    const double z_out = (s.audited - s.nonmember_mean) / s.pooled_std;
    s.predicted_member = z_in * z_in < z_out * z_out;
    if (s.predicted_member == s.is_member) ++correct;
    if (s.is_member) ++members;
    report.per_sample.push_back(s);
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  report.unstable = members < kMinStableAttack;
  return report;
}

inline MiaReport ulira(const ShadowSet& shadows, const Vector& audited,
                       const AttackSet& attack, const LossSpec& spec,
                       ScoreKind kind = ScoreKind::logit) {
  if (shadows.targets.size() < 2 || shadows.references.size() < 2)
    throw UsageError("ulira: need at least 2 shadows per side");
  if (attack.members.size() != attack.nonmembers.size())
    throw UsageError("ulira: unbalanced attack set");
  ScoreTable table;
  auto add = [&](const Dataset& data, bool member) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.row(i);
      const int y = data.label(i);
      std::vector<double> in, out;
      for (const Vector& t : shadows.targets) in.push_back(mia_score(spec, t, x, y, kind));
      for (const Vector& r : shadows.references) out.push_back(mia_score(spec, r, x, y, kind));
      table.member_hypothesis.push_back(std::move(in));
      table.nonmember_hypothesis.push_back(std::move(out));
      table.audited.push_back(mia_score(spec, audited, x, y, kind));
      table.is_member.push_back(member);
    }
  };
  add(attack.members, true);
  add(attack.nonmembers, false);
  return ulira_scores(table);
}

inline nlohmann::json mia_report_json(const MiaReport& report,
                                      const std::string& method, double r_f,
                                      std::uint64_t seed) {
  return nlohmann::json{{"method", method},
                        {"r_f", r_f},
                        {"seed", seed},
                        {"accuracy", report.accuracy},
                        {"n_attacked", report.n_attacked}};
}

}  // namespace vru
