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

// Unlearns 1% of the Digits training pool with VRU and compares the result
// with plain fine-tuning at the same gradient budget. The noise is shown twice:
// with the closed-form certified scale and with a measured sensitivity.
//
//   vru_example [path/to/digits.csv]

#include <cstdio>
#include <string>

#include "vru/all.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : VRU_DIGITS_CSV;
  const vru::Dataset data = vru::load_dataset(path);

  const vru::LossSpec base = vru::LossSpec::logistic(0.1, data.num_classes(), data.feature_dim());
  const vru::LogisticLoss loss(vru::with_constants(base, vru::estimate_constants(base, data)));

  vru::RngStream rng(2026);
  const vru::DataSplit split = vru::make_split(data, 0.01, 0.2, rng);
  std::printf("retain %zu  forget %zu  test %zu\n", split.retain.size(), split.forget.size(),
              split.test.size());

  const vru::Vector theta_star = vru::train_to_optimum(loss, split.train(), 1e-10);
  const vru::Vector theta_r = vru::train_to_optimum(loss, split.retain, 1e-10, theta_star);
  const auto budget = static_cast<std::int64_t>(5 * (split.retain.size() + split.forget.size()));

  vru::VruConfig cfg;
  cfg.budget = budget;
  cfg.batch_size = 8;
  vru::RngStream vru_rng = rng.split("vru");
  const vru::VruResult r =
      vru::vru_run(loss, split, theta_star, vru::PrivacyBudget::direct(1.0), cfg, vru_rng);

  // Same run with sigma = kappa * max distance to theta_r over a few probes.
  vru::VruConfig probe_cfg = cfg;
  probe_cfg.calibration = vru::NoiseCalibration::unit;
  cfg.calibration = vru::NoiseCalibration::measured;
  cfg.sensitivity = vru::measure_sensitivity(
      [&](vru::RngStream& probe) {
        return vru::vru_run(loss, split, theta_star, vru::PrivacyBudget::direct(0.0), probe_cfg,
                            probe)
            .pre_noise;
      },
      theta_r, 5, rng.split("sensitivity"));
  vru::RngStream measured_rng = rng.split("vru");
  const vru::VruResult m =
      vru::vru_run(loss, split, theta_star, vru::PrivacyBudget::direct(1.0), cfg, measured_rng);

  vru::RngStream ft_rng = rng.split("fine_tune");
  const vru::UnlearnOutcome ft =
      vru::fine_tune(loss, split.retain, theta_star, budget,
                     vru::BaselineConfig::defaults(vru::BaselineMethod::fine_tune), ft_rng);

  const auto& spec = loss.spec();
  std::printf("budget %lld sample gradients\n", static_cast<long long>(budget));
  std::printf("original model     excess %.3e\n",
              vru::excess_risk(spec, theta_star, split.retain, theta_r));
  std::printf("vru pre-noise      excess %.3e  (%lld steps)\n",
              vru::excess_risk(spec, r.pre_noise, split.retain, theta_r),
              static_cast<long long>(r.steps));
  std::printf("vru certified      excess %.3e  (sigma %.3e)\n",
              vru::excess_risk(spec, r.post_noise, split.retain, theta_r), r.noise_sigma);
  std::printf("vru measured       excess %.3e  (sigma %.3e)\n",
              vru::excess_risk(spec, m.post_noise, split.retain, theta_r), m.noise_sigma);
  std::printf("fine-tune          excess %.3e\n",
              vru::excess_risk(spec, ft.theta, split.retain, theta_r));
  return 0;
}
