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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vru/audit.hpp"
#include "vru/baselines.hpp"
#include "vru/bench/config.hpp"
#include "vru/bench/model_io.hpp"
#include "vru/bench/records.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/logistic.hpp"
#include "vru/loss.hpp"
#include "vru/retrain.hpp"
#include "vru/rng.hpp"
#include "vru/unlearn.hpp"

namespace vru::bench {

// Stream for one purpose within one (seed, r_f) cell.
inline RngStream cell_stream(std::uint64_t seed, double r_f, std::string_view purpose) {
  return RngStream(seed).split("rf=" + format_17(r_f)).split(purpose);
}

// Loaded data, the train/test partition and the original model. The test
// partition depends only on split_seed, so the original model is trained
// once and only the forget draw varies with the run seed.
class Workbench {
 public:
  explicit Workbench(UnlearnConfig cfg, std::ostream* log = nullptr)
      : cfg_(std::move(cfg)), log_(log) {
    cfg_.validate();
    if (cfg_.dataset == "synthetic") {
      RngStream rng = RngStream(cfg_.split_seed).split("blobs");
      data_ = make_blobs(cfg_.synthetic, rng);
    } else {
      data_ = load_dataset(cfg_.dataset);
    }
    const LossSpec base =
        LossSpec::logistic(cfg_.lambda, data_.num_classes(), data_.feature_dim());
    spec_ = with_constants(base, estimate_constants(base, data_));
    loss_ = LogisticLoss(spec_);
    RngStream split_rng = RngStream(cfg_.split_seed).split("test");
    tt_ = split_train_test(data_.size(), cfg_.test_fraction, split_rng);
    pool_ = data_.subset(tt_.train_index);
    test_ = data_.subset(tt_.test_index);
    note("training original model on " + std::to_string(pool_.size()) + " samples");
    theta_star_ = train_to_optimum(loss_, pool_, cfg_.tol);
  }

  const UnlearnConfig& config() const { return cfg_; }
  const LossSpec& spec() const { return spec_; }
  const LogisticLoss& loss() const { return loss_; }
  const Dataset& data() const { return data_; }
  const Dataset& pool() const { return pool_; }
  const Dataset& test() const { return test_; }
  const Vector& theta_star() const { return theta_star_; }

  DataSplit split_for(double r_f, std::uint64_t seed) const {
    RngStream rng = cell_stream(seed, r_f, "forget");
    return draw_forget(data_, tt_.train_index, tt_.test_index, r_f, rng);
  }

  // Retain optimum, warm-started from the original model and cached per cell.
  const Vector& retain_optimum(double r_f, std::uint64_t seed, const DataSplit& split) {
    auto key = std::make_pair(r_f, seed);
    auto it = retain_optima_.find(key);
    if (it == retain_optima_.end())
      it = retain_optima_
               .emplace(key, train_to_optimum(loss_, split.retain, cfg_.tol, theta_star_))
               .first;
    return it->second;
  }

  std::int64_t budget_for(const DataSplit& split) const {
    return std::llround(cfg_.epochs * static_cast<double>(split.retain.size() + split.forget.size()));
  }

  const Dataset& eval_set(const DataSplit& split) const {
    return cfg_.eval_set == "retain" ? split.retain : test_;
  }

  void note(const std::string& msg) const {
    if (log_) *log_ << msg << std::endl;
  }

 private:
  UnlearnConfig cfg_;
  std::ostream* log_;
  Dataset data_;
  LossSpec spec_;
  LogisticLoss loss_{LossSpec{}};
  TrainTestSplit tt_;
  Dataset pool_;
  Dataset test_;
  Vector theta_star_;
  std::map<std::pair<double, std::uint64_t>, Vector> retain_optima_;
};

struct MethodContext {
  const LogisticLoss& loss;
  const UnlearnConfig& cfg;
  const DataSplit& split;
  const Vector& theta_star;
  const Vector* theta_r = nullptr;  // needed for measured calibration
  std::int64_t budget = 0;
  bool projection = true;
};

struct MethodOutcome {
  Vector pre_noise;
  Vector post_noise;
  std::int64_t budget_used = 0;
  double noise_sigma = 0.0;
};

inline bool is_retraining(const std::string& m) {
  return m == "gd" || m == "sgd" || m == "svrg";
}

namespace detail {

inline std::int64_t epoch_steps(std::size_t n, std::size_t batch) {
  return static_cast<std::int64_t>((n + batch - 1) / batch);
}

inline BaselineConfig baseline_config(const std::string& method, const UnlearnConfig& cfg) {
  BaselineMethod m = BaselineMethod::fine_tune;
  if (method == "nft") m = BaselineMethod::nft;
  else if (method == "neggrad_plus") m = BaselineMethod::neggrad_plus;
  else if (method == "scrub") m = BaselineMethod::scrub;
  BaselineConfig c = BaselineConfig::defaults(m);
  const MethodParams p = cfg.params(method);
  c.lr = p.lr;
  c.lr_decay = p.decay;
  c.alpha = c.uses_ascent() ? p.alpha : 0.0;
  c.batch_size = cfg.batch_size;
  return c;
}

inline double measured_sensitivity(const MethodContext& ctx,
                                   const std::function<Vector(RngStream&)>& pipeline,
                                   const RngStream& rng) {
  if (!ctx.theta_r)
    throw UsageError("measured calibration needs the retain optimum");
  return measure_sensitivity(pipeline, *ctx.theta_r, ctx.cfg.sensitivity_probes,
                             rng.split("sensitivity"));
}

}  // namespace detail

inline MethodOutcome run_method(const std::string& method, const MethodContext& ctx,
                                RngStream& rng) {
  const UnlearnConfig& cfg = ctx.cfg;
  const DataSplit& split = ctx.split;
  const MethodParams p = cfg.params(method);
  const std::size_t b = cfg.batch_size;
  const PrivacyBudget privacy = cfg.privacy();
  MethodOutcome out;

  if (method == "vru") {
    VruConfig v;
    v.mode = cfg.mode;
    v.projection = ctx.projection;
    v.schedule = cfg.vru_schedule == "inverse_mu_t"
                     ? StepSchedule::inverse_mu_t(ctx.loss.mu())
                     : StepSchedule::decayed(p.lr, p.decay, detail::epoch_steps(split.retain.size(), b));
    v.batch_size = b;
    v.budget = ctx.budget;
    v.calibration = cfg.calibration;
    if (cfg.calibration == NoiseCalibration::measured) {
      VruConfig probe_cfg = v;
      probe_cfg.calibration = NoiseCalibration::unit;
      const PrivacyBudget silent = PrivacyBudget::direct(0.0, cfg.delta);
      v.sensitivity = detail::measured_sensitivity(
          ctx,
          [&](RngStream& probe) {
            return vru_run(ctx.loss, split, ctx.theta_star, silent, probe_cfg, probe).pre_noise;
          },
          rng);
    }
    VruResult r = vru_run(ctx.loss, split, ctx.theta_star, privacy, v, rng);
    out.pre_noise = std::move(r.pre_noise);
    out.post_noise = std::move(r.post_noise);
    out.budget_used = r.budget_used;
    out.noise_sigma = r.noise_sigma;
    return out;
  }

  if (method == "gd" || method == "sgd" || method == "svrg") {
    TrainResult r;
    const std::size_t n = split.retain.size();
    if (method == "gd")
      r = retrain_gd(ctx.loss, split.retain, ctx.budget,
                     StepSchedule::decayed(p.lr, p.decay, 1), rng);
    else if (method == "sgd")
      r = retrain_sgd(ctx.loss, split.retain, ctx.budget,
                      StepSchedule::decayed(p.lr, p.decay, detail::epoch_steps(n, b)), rng, b);
    else
      r = retrain_svrg(ctx.loss, split.retain, ctx.budget,
                       StepSchedule::decayed(p.lr, p.decay, static_cast<std::int64_t>(n)), rng);
    out.pre_noise = r.theta;
    out.post_noise = std::move(r.theta);
    out.budget_used = r.budget_used;
    return out;
  }

  BaselineConfig c = detail::baseline_config(method, cfg);
  UnlearnOutcome r;
  if (method == "nft") {
    switch (cfg.calibration) {
      case NoiseCalibration::measured:
        c.sensitivity = detail::measured_sensitivity(
            ctx, [&](RngStream&) { return ctx.theta_star; }, rng);
        break;
      case NoiseCalibration::certified:
        c.sensitivity = split.ratio() *
                        ctx.loss.batch_grad(ctx.theta_star, split.forget).norm() /
                        ctx.loss.mu();
        break;
      case NoiseCalibration::unit:
        c.sensitivity = split.ratio();
        break;
    }
    out.noise_sigma = privacy.kappa * *c.sensitivity;
    r = nft(ctx.loss, split.retain, ctx.theta_star, ctx.budget, privacy, c, rng);
  } else if (method == "fine_tune") {
    r = fine_tune(ctx.loss, split.retain, ctx.theta_star, ctx.budget, c, rng);
  } else if (method == "neggrad_plus") {
    r = neggrad_plus(ctx.loss, split.retain, split.forget, ctx.theta_star, ctx.budget, c, rng);
  } else if (method == "scrub") {
    r = scrub(ctx.loss, split.retain, split.forget, ctx.theta_star, ctx.budget, c, rng);
  } else {
    throw ConfigError("unknown method " + method);
  }
  out.pre_noise = r.theta;
  out.post_noise = std::move(r.theta);
  out.budget_used = r.budget_used;
  return out;
}

struct FigureResult {
  std::vector<RunRecord> records;
  std::vector<RunFailure> failures;
  std::vector<Aggregate> aggregates;
  nlohmann::json mia = nlohmann::json::array();
  std::uint64_t config_hash = 0;
};

namespace detail {

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  std::int64_t ms() const {
    if (!on_) return 0;
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

// Writes <out_dir>/models/<method>[_noproj]_rf<r_f>_seed<seed>_{pre,post}.model.
inline void save_outcome(const Workbench& wb, RunRecord& rec, const MethodOutcome& out) {
  const UnlearnConfig& cfg = wb.config();
  if (!cfg.save_models) return;
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(cfg.out_dir) / "models";
  fs::create_directories(dir);
  const std::string stem = rec.method + (rec.projection ? "" : "_noproj") + "_rf" +
                           format_17(rec.r_f) + "_seed" + std::to_string(rec.seed);
  rec.pre_noise_path = (dir / (stem + "_pre.model")).string();
  rec.post_noise_path = (dir / (stem + "_post.model")).string();
  save_model(rec.pre_noise_path, wb.spec(), out.pre_noise);
  save_model(rec.post_noise_path, wb.spec(), out.post_noise);
}

inline std::vector<bool> projection_arms(const UnlearnConfig& cfg) {
  if (cfg.projection == "both") return {true, false};
  return {cfg.projection == "on"};
}

inline void finish(FigureResult& fig, const UnlearnConfig& cfg) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) rank[cfg.methods[i]] = i;
  std::stable_sort(fig.records.begin(), fig.records.end(),
                   [&](const RunRecord& a, const RunRecord& b) {
                     if (rank[a.method] != rank[b.method]) return rank[a.method] < rank[b.method];
                     if (a.projection != b.projection) return a.projection;
                     return false;
                   });
  fig.aggregates = aggregate(fig.records, cfg.seeds.size());
  fig.config_hash = cfg.hash();
}

}  // namespace detail

// Excess-risk sweep over (method, r_f, seed); the shape of both the
// certified comparison and the projection ablation.
inline FigureResult run_sweep(Workbench& wb) {
  const UnlearnConfig& cfg = wb.config();
  FigureResult fig;
  for (double r_f : cfg.rf) {
    for (std::uint64_t seed : cfg.seeds) {
      DataSplit split;
      const Vector* theta_r = nullptr;
      try {
        split = wb.split_for(r_f, seed);
        theta_r = &wb.retain_optimum(r_f, seed, split);
      } catch (const Error& e) {
        for (const auto& m : cfg.methods) fig.failures.push_back({m, r_f, seed, e.what()});
        continue;
      }
      const std::int64_t budget = wb.budget_for(split);
      for (const std::string& method : cfg.methods) {
        const auto arms = method == "vru" ? detail::projection_arms(cfg) : std::vector<bool>{true};
        for (bool projection : arms) {
          try {
            detail::Stopwatch clock(cfg.timing);
            RngStream rng = cell_stream(seed, r_f, method);
            MethodContext ctx{wb.loss(), cfg, split, wb.theta_star(), theta_r, budget, projection};
            const MethodOutcome out = run_method(method, ctx, rng);
            RunRecord rec;
            rec.config_hash = cfg.hash();
            rec.method = method;
            rec.r_f = r_f;
            rec.seed = seed;
            rec.excess_risk = excess_risk(wb.spec(), out.post_noise, wb.eval_set(split), *theta_r);
            rec.budget_used = out.budget_used;
            rec.kappa = is_retraining(method) ? 0.0 : cfg.kappa_value();
            rec.projection = projection;
            rec.mode = std::string(to_string(cfg.mode));
            rec.wall_ms = clock.ms();
            detail::save_outcome(wb, rec, out);
            fig.records.push_back(std::move(rec));
          } catch (const Error& e) {
            fig.failures.push_back({method, r_f, seed, e.what()});
          }
        }
      }
      wb.note("r_f=" + format_17(r_f) + " seed=" + std::to_string(seed) + " done");
    }
  }
  detail::finish(fig, cfg);
  return fig;
}

inline FigureResult run_fig1(Workbench& wb) { return run_sweep(wb); }

inline FigureResult run_ablation(Workbench& wb) { return run_sweep(wb); }

// Excess risk plus U-LiRA accuracy per (method, r_f, seed). The attack set
// and the shadow originals/references depend only on the cell, so they are
// shared by all methods; each method unlearns its own target shadows.
inline FigureResult run_fig2(Workbench& wb) {
  const UnlearnConfig& cfg = wb.config();
  FigureResult fig;
  for (double r_f : cfg.rf) {
    for (std::uint64_t seed : cfg.seeds) {
      DataSplit split;
      const Vector* theta_r = nullptr;
      AttackSet attack;
      ShadowPool pool;
      try {
        split = wb.split_for(r_f, seed);
        theta_r = &wb.retain_optimum(r_f, seed, split);
        RngStream attack_rng = cell_stream(seed, r_f, "attack");
        attack = make_attack_set(split, attack_rng);
        if (attack.members.size() < kMinStableAttack)
          wb.note("warning: r_f=" + format_17(r_f) + " attacks only " +
                  std::to_string(attack.members.size()) + " forget samples; accuracy is unstable");
        pool = prepare_shadows(wb.loss(), split, attack, cfg.shadows, wb.theta_star(),
                               cell_stream(seed, r_f, "shadows"),
                               ShadowOptions{cfg.shadow_tol, 1'000'000});
      } catch (const Error& e) {
        for (const auto& m : cfg.methods) fig.failures.push_back({m, r_f, seed, e.what()});
        continue;
      }
      const std::int64_t budget = wb.budget_for(split);
      for (const std::string& method : cfg.methods) {
        try {
          detail::Stopwatch clock(cfg.timing);
          RngStream rng = cell_stream(seed, r_f, method);
          MethodContext ctx{wb.loss(), cfg, split, wb.theta_star(), theta_r, budget, cfg.projection != "off"};
          const MethodOutcome out = run_method(method, ctx, rng);
          const Unlearner unlearner = [&](const DataSplit& s, const Vector& start, RngStream& r) {
            MethodContext sc{wb.loss(), cfg, s, start, nullptr, wb.budget_for(s), cfg.projection != "off"};
            return run_method(method, sc, r).post_noise;
          };
          const ShadowSet shadows = unlearn_shadows(
              pool, unlearner, cell_stream(seed, r_f, method).split("shadows"));
          const MiaReport report = ulira(shadows, out.post_noise, attack, wb.spec());
          RunRecord rec;
          rec.config_hash = cfg.hash();
          rec.method = method;
          rec.r_f = r_f;
          rec.seed = seed;
          rec.excess_risk = excess_risk(wb.spec(), out.post_noise, wb.eval_set(split), *theta_r);
          rec.mia_accuracy = report.accuracy;
          rec.budget_used = out.budget_used;
          rec.kappa = method == "vru" ? cfg.kappa_value() : 0.0;
          rec.projection = cfg.projection != "off";
          rec.mode = std::string(to_string(cfg.mode));
          rec.wall_ms = clock.ms();
          detail::save_outcome(wb, rec, out);
          fig.mia.push_back(mia_report_json(report, method, r_f, seed));
          fig.records.push_back(std::move(rec));
        } catch (const Error& e) {
          fig.failures.push_back({method, r_f, seed, e.what()});
        }
      }
      wb.note("r_f=" + format_17(r_f) + " seed=" + std::to_string(seed) + " done");
    }
  }
  detail::finish(fig, cfg);
  return fig;
}

struct AblationRatio {
  double r_f = 0.0;
  double on = 0.0;
  double off = 0.0;
  double ratio = 0.0;
};

inline std::vector<AblationRatio> ablation_ratios(const std::vector<Aggregate>& table,
                                                  const std::vector<double>& grid) {
  std::vector<AblationRatio> out;
  for (double r_f : grid) {
    const Aggregate* on = find_aggregate(table, "vru", r_f, true);
    const Aggregate* off = find_aggregate(table, "vru", r_f, false);
    if (!on || !off) continue;
    out.push_back({r_f, on->geo_mean_excess, off->geo_mean_excess,
                   off->geo_mean_excess / on->geo_mean_excess});
  }
  return out;
}

// Writes <stem>_records.csv and <stem>_aggregate.csv, plus <stem>_mia.json
// when MIA reports exist and <stem>_ratio.csv for two-arm ablations.
inline void write_figure(const FigureResult& fig, const UnlearnConfig& cfg,
                         const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(stem + "_records.csv");
    write_records(out, fig.config_hash, fig.records, fig.failures);
  }
  {
    auto out = open(stem + "_aggregate.csv");
    write_aggregates(out, fig.config_hash, fig.aggregates);
  }
  if (!fig.mia.empty()) {
    auto out = open(stem + "_mia.json");
    out << fig.mia.dump(2) << "\n";
  }
  if (cfg.projection == "both") {
    auto out = open(stem + "_ratio.csv");
    out << "# config_hash=" << hash_hex(fig.config_hash) << "\n";
    out << "r_f,geo_mean_on,geo_mean_off,off_over_on\n";
    for (const AblationRatio& r : ablation_ratios(fig.aggregates, cfg.rf))
      out << format_17(r.r_f) << ',' << format_17(r.on) << ',' << format_17(r.off)
          << ',' << format_17(r.ratio) << "\n";
  }
}

}  // namespace vru::bench
