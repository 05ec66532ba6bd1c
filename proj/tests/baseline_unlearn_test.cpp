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

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace vru {
namespace {

using testing::central_difference;
using testing::random_dataset;
using testing::random_vector;

struct Problem {
  LogisticLoss loss{LossSpec::logistic(0.1, 3, 4)};
  Dataset retain;
  Dataset forget;
  Vector start;

  explicit Problem(std::uint64_t seed) {
    RngStream rng(seed);
    retain = random_dataset(96, 4, 3, rng);
    forget = random_dataset(10, 4, 3, rng);
    start = random_vector(15, 0.5, rng);
  }
};

TEST(BaselineConfigTest, DefaultsAndValidation) {
  const auto ng = BaselineConfig::defaults(BaselineMethod::neggrad_plus);
  EXPECT_EQ(ng.lr, 3e-3);
  EXPECT_EQ(ng.lr_decay, 0.7);
  EXPECT_EQ(ng.alpha, 5e-3);
  EXPECT_EQ(BaselineConfig::defaults(BaselineMethod::nft).lr, 0.3);
  EXPECT_EQ(BaselineConfig::defaults(BaselineMethod::scrub).alpha, 5e-3);
  EXPECT_EQ(BaselineConfig::defaults(BaselineMethod::fine_tune).alpha, 0.0);
  auto ft = BaselineConfig::defaults(BaselineMethod::fine_tune);
  ft.alpha = 0.1;
  EXPECT_THROW(ft.validate(), ConfigError);
  ft.alpha = 0.0;
  ft.lr = 0.0;
  EXPECT_THROW(ft.validate(), ConfigError);
  EXPECT_EQ(to_string(BaselineMethod::scrub), "scrub");
}

TEST(FineTuneTest, TinyBudgetReturnsStart) {
  Problem p(1);
  RngStream rng(2);
  const auto cfg = BaselineConfig::defaults(BaselineMethod::fine_tune);
  const UnlearnOutcome out = fine_tune(p.loss, p.retain, p.start, 7, cfg, rng);
  EXPECT_EQ(out.theta, p.start);
  EXPECT_EQ(out.budget_used, 0);
}

TEST(FineTuneTest, ConstantRateMatchesSgd) {
  Problem p(1);
  auto cfg = BaselineConfig::defaults(BaselineMethod::fine_tune);
  cfg.lr_decay = 1.0;
  cfg.lr = 0.05;
  RngStream a(3), b(3);
  const UnlearnOutcome out = fine_tune(p.loss, p.retain, p.start, 500, cfg, a);
  const TrainResult ref = sgd(p.loss, p.retain, p.start, StepSchedule::constant(0.05), 8, 500, b);
  EXPECT_EQ(out.theta, ref.theta);
  EXPECT_EQ(out.budget_used, 500);
}

TEST(NftTest, ZeroNoiseEqualsFineTune) {
  Problem p(4);
  auto cfg = BaselineConfig::defaults(BaselineMethod::nft);
  const auto ft_cfg = [&] {
    auto c = cfg;
    c.method = BaselineMethod::fine_tune;
    c.sensitivity.reset();
    return c;
  }();
  RngStream r0(5);
  const Vector ft = fine_tune(p.loss, p.retain, p.start, 300, ft_cfg, r0).theta;
  cfg.sensitivity = 0.8;
  RngStream r1(5);
  EXPECT_EQ(nft(p.loss, p.retain, p.start, 300, PrivacyBudget::direct(0.0), cfg, r1).theta, ft);
  cfg.sensitivity = 0.0;
  RngStream r2(5);
  EXPECT_EQ(nft(p.loss, p.retain, p.start, 300, PrivacyBudget::direct(2.0), cfg, r2).theta, ft);
  cfg.sensitivity.reset();
  RngStream r3(5);
  EXPECT_THROW(nft(p.loss, p.retain, p.start, 300, PrivacyBudget::direct(1.0), cfg, r3),
               UsageError);
}

TEST(NftTest, NoiseScaleMatchesKappaTimesSensitivity) {
  Problem p(4);
  auto cfg = BaselineConfig::defaults(BaselineMethod::nft);
  cfg.sensitivity = 0.4;
  const PrivacyBudget privacy = PrivacyBudget::direct(1.5);
  const int draws = 100000;
  Vector s = Vector::Zero(15), s2 = Vector::Zero(15);
  for (int k = 0; k < draws; ++k) {
    RngStream rng = RngStream(77).split(static_cast<std::uint64_t>(k));
    const Vector d = nft(p.loss, p.retain, p.start, 0, privacy, cfg, rng).theta - p.start;
    s += d;
    s2 += d.cwiseProduct(d);
  }
  const double target = 1.5 * 0.4;
  for (Eigen::Index i = 0; i < 15; ++i) {
    const double mean = s[i] / draws;
    const double sd = std::sqrt(s2[i] / draws - mean * mean);
    EXPECT_NEAR(sd, target, 0.02 * target) << i;
  }
}

TEST(NegGradTest, AlphaZeroIsHalfBudgetFineTune) {
  Problem p(6);
  auto cfg = BaselineConfig::defaults(BaselineMethod::neggrad_plus);
  cfg.alpha = 0.0;
  RngStream a(7), b(7);
  const UnlearnOutcome ng = neggrad_plus(p.loss, p.retain, p.forget, p.start, 800, cfg, a);
  auto ft_cfg = cfg;
  ft_cfg.method = BaselineMethod::fine_tune;
  const UnlearnOutcome ft = fine_tune(p.loss, p.retain, p.start, 400, ft_cfg, b);
  EXPECT_EQ(ng.theta, ft.theta);
  EXPECT_EQ(ng.budget_used, 800);
  EXPECT_EQ(ng.forget_units, 400);
}

TEST(NegGradTest, HandIterates) {
  Problem p(6);
  auto cfg = BaselineConfig::defaults(BaselineMethod::neggrad_plus);
  cfg.batch_size = 2;
  cfg.lr = 0.1;
  cfg.alpha = 0.5;
  cfg.lr_decay = 1.0;
  RngStream rng(8);
  const UnlearnOutcome out = neggrad_plus(p.loss, p.retain, p.forget, p.start, 8, cfg, rng);

  RngStream main(8);
  RngStream frng = RngStream(8).split("neggrad/forget");
  Vector theta = p.start;
  for (int step = 0; step < 2; ++step) {
    Vector gf = Vector::Zero(15);
    for (int k = 0; k < 2; ++k)
      p.loss.accumulate_sample_grad(theta, p.forget, frng.uniform_index(p.forget.size()), 0.5, gf);
    theta += 0.1 * 0.5 * gf;
    Vector gr = Vector::Zero(15);
    for (int k = 0; k < 2; ++k)
      p.loss.accumulate_sample_grad(theta, p.retain, main.uniform_index(p.retain.size()), 0.5, gr);
    theta -= 0.1 * gr;
  }
  EXPECT_LE((out.theta - theta).norm(), 1e-15);
  EXPECT_EQ(out.trace, (std::vector<StepKind>{StepKind::ascent, StepKind::descent,
                                              StepKind::ascent, StepKind::descent}));
}

TEST(AlternatingTest, TracesEndOnDescent) {
  Problem p(9);
  for (std::int64_t budget : {1, 8, 9, 15, 16, 17, 100, 333, 1000}) {
    RngStream a(10), b(10);
    const auto ng = neggrad_plus(p.loss, p.retain, p.forget, p.start, budget,
                                 BaselineConfig::defaults(BaselineMethod::neggrad_plus), a);
    const auto sc = scrub(p.loss, p.retain, p.forget, p.start, budget,
                          BaselineConfig::defaults(BaselineMethod::scrub), b);
    ASSERT_FALSE(ng.trace.empty());
    ASSERT_FALSE(sc.trace.empty());
    EXPECT_EQ(ng.trace.back(), StepKind::descent) << budget;
    EXPECT_EQ(sc.trace.back(), StepKind::descent) << budget;
    EXPECT_EQ(ng.budget_used, budget);
    EXPECT_EQ(sc.budget_used, budget);
  }
}

TEST(ScrubTest, DegeneratesToFineTune) {
  Problem p(11);
  auto cfg = BaselineConfig::defaults(BaselineMethod::scrub);
  cfg.alpha = 0.0;
  cfg.kl_weight = 0.0;
  RngStream a(12), b(12);
  const auto sc = scrub(p.loss, p.retain, p.forget, p.start, 700, cfg, a);
  auto ft_cfg = cfg;
  ft_cfg.method = BaselineMethod::fine_tune;
  const auto ft = fine_tune(p.loss, p.retain, p.start, 700, ft_cfg, b);
  EXPECT_EQ(sc.theta, ft.theta);
}

TEST(ScrubTest, KlVanishesForIdenticalModels) {
  Problem p(13);
  const LossSpec& spec = p.loss.spec();
  const auto x = p.retain.row(0);
  EXPECT_NEAR(scrub_kl(spec, p.start, p.start, x), 0.0, 1e-15);
  Vector g = Vector::Zero(15);
  accumulate_kl_grad(spec, p.start, predict_proba(spec, p.start, x), x, 1.0, g);
  EXPECT_LE(g.norm(), 1e-15);
}

TEST(ScrubTest, KlGradientFiniteDifference) {
  Problem p(14);
  const LossSpec& spec = p.loss.spec();
  RngStream rng(15);
  for (int probe = 0; probe < 50; ++probe) {
    const Vector student = random_vector(15, 1.5, rng);
    const Vector teacher = random_vector(15, 1.5, rng);
    const Vector x = p.retain.row(rng.uniform_index(p.retain.size())).transpose();
    Vector g = Vector::Zero(15);
    accumulate_kl_grad(spec, student, predict_proba(spec, teacher, x), x, 1.0, g);
    const Vector numeric = central_difference(
        [&](const Vector& s) { return scrub_kl(spec, s, teacher, x); }, student, 1e-6);
    EXPECT_LE((g - numeric).norm(), 1e-6 * (1.0 + g.norm()));
  }
}

TEST(SensitivityTest, DeterministicPipelineAndMonotonicity) {
  const Vector ref = Vector::Zero(3);
  const Vector fixed = Vector::Constant(3, 2.0);
  EXPECT_DOUBLE_EQ(measure_sensitivity([&](RngStream&) { return fixed; }, ref, 4, RngStream(1)),
                   fixed.norm());
  auto noisy = [](RngStream& r) { return r.normal_vector(3); };
  double last = 0.0;
  for (int n = 2; n <= 10; ++n) {
    const double v = measure_sensitivity(noisy, ref, n, RngStream(2));
    EXPECT_GE(v, last);
    last = v;
  }
  EXPECT_THROW(measure_sensitivity(noisy, ref, 1, RngStream(2)), UsageError);
}

TEST(SensitivityTest, FineTuneOnDigitsWithinDistanceBoundPlusResidual) {
  const Dataset& data = testing::digits();
  const LogisticLoss loss(testing::digits_spec(data));
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  RngStream split_rng(3);
  const DataSplit split = draw_forget(data, all, {}, 0.01, split_rng);
  const Vector star = train_to_optimum(loss, data, 1e-10);
  const Vector star_r = train_to_optimum(loss, split.retain, 1e-10, star);
  const double bound = split.ratio() * loss.batch_grad(star, split.forget).norm() / loss.mu();
  const auto cfg = BaselineConfig::defaults(BaselineMethod::fine_tune);
  double residual = 0.0;
  const double value = measure_sensitivity(
      [&](RngStream& r) {
        const Vector t = fine_tune(loss, split.retain, star,
                                   static_cast<std::int64_t>(split.retain.size()), cfg, r).theta;
        residual = std::max(residual, (t - star).norm());
        return t;
      },
      star_r, 3, RngStream(4));
  EXPECT_LE(value, bound + residual);
}

TEST(BaselineBudgetTest, ParityAcrossMethods) {
  Problem p(16);
  const std::int64_t budget = 1061;
  auto nft_cfg = BaselineConfig::defaults(BaselineMethod::nft);
  nft_cfg.sensitivity = 0.1;
  RngStream r(17);
  std::vector<std::int64_t> used = {
      fine_tune(p.loss, p.retain, p.start, budget,
                BaselineConfig::defaults(BaselineMethod::fine_tune), r).budget_used,
      nft(p.loss, p.retain, p.start, budget, PrivacyBudget::direct(1.0), nft_cfg, r).budget_used,
      neggrad_plus(p.loss, p.retain, p.forget, p.start, budget,
                   BaselineConfig::defaults(BaselineMethod::neggrad_plus), r).budget_used,
      scrub(p.loss, p.retain, p.forget, p.start, budget,
            BaselineConfig::defaults(BaselineMethod::scrub), r).budget_used};
  for (auto u : used) {
    EXPECT_LE(u, budget);
    EXPECT_GT(u, budget - 8);
  }
}

}  // namespace
}  // namespace vru
