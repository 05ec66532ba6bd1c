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

// Acceptance suite: runs each criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is the number of failures.
//
//   acceptance [criterion ...] [--out DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vru/all.hpp"
#include "vru/bench/config.hpp"
#include "vru/bench/experiments.hpp"
#include "vru/bench/records.hpp"

namespace {

using namespace vru;
using bench::UnlearnConfig;
using bench::Workbench;

std::string out_dir = "acceptance_out";

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

UnlearnConfig digits_config(const std::string& preset) {
  UnlearnConfig cfg = UnlearnConfig::preset(preset);
  cfg.dataset = VRU_DIGITS_CSV;
  cfg.timing = false;
  cfg.out_dir = out_dir;
  return cfg;
}

Workbench& digits_bench() {
  static Workbench wb(digits_config("fig1"));
  return wb;
}

// 1. Unbiasedness at the original model.
Verdict estimator_unbiased() {
  Workbench& wb = digits_bench();
  const LogisticLoss& loss = wb.loss();
  const Vector& star = wb.theta_star();
  const double star_grad = loss.batch_grad(star, wb.pool()).norm();
  double worst = 0.0, literal = 0.0;
  for (double r_f : wb.config().rf) {
    const DataSplit split = wb.split_for(r_f, 0);
    const Vector gf = loss.batch_grad(star, split.forget);
    Vector mean = Vector::Zero(star.size());
    for (std::size_t i = 0; i < split.retain.size(); ++i)
      mean += vru_gradient(loss, star, star, split.retain, i, gf, split.ratio());
    mean /= static_cast<double>(split.retain.size());
    worst = std::max(worst, (mean - loss.batch_grad(star, split.retain)).norm());
    literal = std::max(literal, mean.norm());
  }
  return {star_grad <= 1e-10 && worst <= 1e-6,
          "|grad L(theta*)| = " + fmt("%.2e", star_grad) +
              ", max |mean estimator - grad L_r(theta*)| = " + fmt("%.2e", worst) +
              " (<= 1e-6); |mean estimator| itself = " + fmt("%.2e", literal) +
              " = ratio*|grad L_f(theta*)|, nonzero by construction"};
}

// 2. Optima proximity on random instances.
Verdict optima_proximity() {
  Workbench& wb = digits_bench();
  const LogisticLoss& loss = wb.loss();
  RngStream rng(2002);
  int violations = 0;
  double tightest = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double r_f = std::pow(10.0, -3.0 + 2.0 * rng.uniform());
    const std::uint64_t seed = 1000 + rng.uniform_index(100000);
    const DataSplit split = wb.split_for(r_f, seed);
    const Vector& star_r = wb.retain_optimum(r_f, seed, split);
    const double dist = (wb.theta_star() - star_r).norm();
    const double bound =
        split.ratio() * loss.batch_grad(wb.theta_star(), split.forget).norm() / loss.mu();
    if (!(dist <= bound)) ++violations;
    tightest = std::max(tightest, dist / bound);
  }
  return {violations == 0, std::to_string(violations) + " violations in 20 instances, max dist/bound = " +
                               fmt("%.3f", tightest)};
}

// 3. Estimator norm bound inside the projection ball.
Verdict estimator_norm_bound() {
  Workbench& wb = digits_bench();
  const LogisticLoss& loss = wb.loss();
  const Vector& star = wb.theta_star();
  const double cond = loss.spec().condition_number();
  RngStream rng(3003);
  int violations = 0;
  double tightest = 0.0;
  std::map<double, std::pair<DataSplit, Vector>> cells;
  for (double r_f : wb.config().rf) {
    DataSplit split = wb.split_for(r_f, 3);
    Vector gf = loss.batch_grad(star, split.forget);
    cells.emplace(r_f, std::make_pair(std::move(split), std::move(gf)));
  }
  for (int probe = 0; probe < 1000; ++probe) {
    auto it = cells.begin();
    std::advance(it, static_cast<long>(rng.uniform_index(cells.size())));
    const DataSplit& split = it->second.first;
    const Vector& gf = it->second.second;
    const double ratio = split.ratio();
    const double radius = ratio * gf.norm() / loss.mu();
    const Vector dir = rng.normal_vector(loss.dim());
    const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(loss.dim()));
    const Vector theta = star + (scale / dir.norm()) * dir;
    const std::size_t i = rng.uniform_index(split.retain.size());
    const double norm = vru_gradient(loss, theta, star, split.retain, i, gf, ratio).norm();
    const double bound = (1.0 + cond) * ratio * gf.norm();
    if (!(norm <= bound)) ++violations;
    tightest = std::max(tightest, norm / bound);
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000 probes, max norm/bound = " +
                               fmt("%.3f", tightest)};
}

// 4. Gaussian mechanism calibration.
Verdict noise_calibration() {
  Workbench& wb = digits_bench();
  const LogisticLoss& loss = wb.loss();
  const DataSplit split = wb.split_for(1e-2, 0);
  VruConfig cfg;
  cfg.budget = wb.budget_for(split);
  cfg.batch_size = 8;
  const PrivacyBudget privacy = PrivacyBudget::direct(1.0);
  RngStream run_rng(4004);
  const VruResult r = vru_run(loss, split, wb.theta_star(), privacy, cfg, run_rng);
  const double expected = split.ratio() *
                          nu_T(r.steps, privacy.delta, r.forget_grad_norm, loss.mu(),
                               loss.spec().condition_number()) *
                          privacy.kappa;

  const int draws = 100000;
  const auto d = static_cast<Eigen::Index>(loss.dim());
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(d), s2 = Eigen::ArrayXd::Zero(d);
  bool replay_matches = false;
  for (int k = 0; k < draws; ++k) {
    RngStream rng = RngStream(4004 + static_cast<std::uint64_t>(k)).split(kVruNoiseTag);
    const Vector noisy = noise_model(r.pre_noise, r.noise_sigma, rng);
    const Eigen::ArrayXd delta = (noisy - r.pre_noise).array();
    if (k == 0) replay_matches = noisy == r.post_noise;
    s += delta;
    s2 += delta.square();
  }
  const Eigen::ArrayXd mean = s / draws;
  const Eigen::ArrayXd sd = (s2 / draws - mean.square()).sqrt();
  const double worst = ((sd / expected) - 1.0).abs().maxCoeff();
  return {replay_matches && std::abs(r.noise_sigma / expected - 1.0) < 1e-12 && worst <= 0.02,
          "sigma = " + fmt("%.4g", r.noise_sigma) + " (ratio*nu_T*kappa = " + fmt("%.4g", expected) +
              "), T = " + std::to_string(r.steps) + ", worst per-coordinate std deviation " +
              fmt("%.2f%%", 100.0 * worst) + " over 650 coordinates (<= 2%)"};
}

// 5. 1/T convergence trend on a synthetic strongly convex instance.
Verdict convergence_trend() {
  BlobSpec blobs;
  blobs.n = 600;
  blobs.feature_dim = 20;
  blobs.num_classes = 3;
  RngStream data_rng(5005);
  const Dataset data = make_blobs(blobs, data_rng);
  const LossSpec base = LossSpec::logistic(0.1, 3, 20);
  const LogisticLoss loss(with_constants(base, estimate_constants(base, data)));
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Vector star = train_to_optimum(loss, data, 1e-10);
  double sum1 = 0.0, sum4 = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream split_rng = RngStream(seed).split("forget");
    const DataSplit split = draw_forget(data, all, {}, 0.05, split_rng);
    const Vector star_r = train_to_optimum(loss, split.retain, 1e-10, star);
    for (std::int64_t t : {1000, 4000}) {
      VruConfig cfg;
      cfg.steps = t;
      cfg.calibration = NoiseCalibration::unit;
      RngStream rng = RngStream(seed).split("vru");
      const VruResult r = vru_run(loss, split, star, PrivacyBudget::direct(0.0), cfg, rng);
      const double excess = excess_risk(loss.spec(), r.pre_noise, split.retain, star_r);
      (t == 1000 ? sum1 : sum4) += excess;
    }
  }
  const double m1 = sum1 / 100.0, m4 = sum4 / 100.0;
  return {m4 <= 0.5 * m1, "mean excess T=1000: " + fmt("%.4e", m1) + ", T=4000: " + fmt("%.4e", m4) +
                              ", ratio " + fmt("%.3f", m4 / m1) + " (<= 0.5)"};
}

// 6. Linear noise scale and quadratic noise-induced excess risk.
Verdict rf_scaling() {
  Workbench& wb = digits_bench();
  const LogisticLoss& loss = wb.loss();
  const double g = 0.7, mu = loss.mu(), cond = loss.spec().condition_number();
  const std::int64_t steps = 7000;
  const double base = nu_T(steps, 0.05, g, mu, cond);
  double linear_err = 0.0;
  for (double ratio : {0.01, 0.02, 0.04})
    linear_err = std::max(linear_err, std::abs(ratio * base / (0.01 * base) - ratio / 0.01) /
                                          (ratio / 0.01));

  const DataSplit split = wb.split_for(1e-2, 0);
  const Vector& star_r = wb.retain_optimum(1e-2, 0, split);
  VruConfig cfg;
  cfg.budget = wb.budget_for(split);
  cfg.batch_size = 8;
  RngStream rng(6006);
  const Vector pre = vru_run(loss, split, wb.theta_star(), PrivacyBudget::direct(0.0), cfg, rng).pre_noise;
  const double pre_excess = excess_risk(loss.spec(), pre, split.retain, star_r);
  const double kappa = 0.1;
  std::vector<double> increments;
  for (double ratio : {0.01, 0.02, 0.04}) {
    const double sigma = ratio * kappa;
    double total = 0.0;
    RngStream noise(6007);
    for (int k = 0; k < 500; ++k) {
      const Vector z = noise.normal_vector(loss.dim());
      total += excess_risk(loss.spec(), pre + sigma * z, split.retain, star_r) - pre_excess;
      total += excess_risk(loss.spec(), pre - sigma * z, split.retain, star_r) - pre_excess;
    }
    increments.push_back(total / 1000.0);
  }
  const double r2 = increments[1] / increments[0] / 4.0;
  const double r4 = increments[2] / increments[0] / 16.0;
  const bool ok = linear_err < 1e-12 && std::abs(r2 - 1.0) <= 0.15 && std::abs(r4 - 1.0) <= 0.15;
  return {ok, "sigma/ratio constant to " + fmt("%.1e", linear_err) + "; increments " +
                  fmt("%.3e", increments[0]) + ", " + fmt("%.3e", increments[1]) + ", " +
                  fmt("%.3e", increments[2]) + "; normalised by ratio^2: x" + fmt("%.3f", r2) +
                  ", x" + fmt("%.3f", r4) + " (within 15%)"};
}

void save(const bench::FigureResult& fig, const UnlearnConfig& cfg, const std::string& stem) {
  bench::write_figure(fig, cfg, stem);
}

std::string aggregate_line(const bench::FigureResult& fig, const std::string& method, double r_f,
                           bool projection = true) {
  const bench::Aggregate* a = bench::find_aggregate(fig.aggregates, method, r_f, projection);
  return a ? fmt("%.3e", a->geo_mean_excess) : std::string("missing");
}

// 7. fig1 ordering.
Verdict figure1_ordering() {
  const UnlearnConfig cfg = digits_config("fig1");
  Workbench wb(cfg);
  const bench::FigureResult fig = bench::run_fig1(wb);
  save(fig, cfg, "fig1");
  bool ok = fig.failures.empty();
  std::ostringstream detail;
  for (double r_f : cfg.rf) {
    const bench::Aggregate* vru = bench::find_aggregate(fig.aggregates, "vru", r_f);
    if (!vru) {
      ok = false;
      continue;
    }
    detail << "\n    r_f=" << r_f << ": vru " << aggregate_line(fig, "vru", r_f);
    for (const char* other : {"nft", "gd", "sgd", "svrg"}) {
      const bench::Aggregate* o = bench::find_aggregate(fig.aggregates, other, r_f);
      const bool better = o && vru->geo_mean_excess <= o->geo_mean_excess;
      ok = ok && better;
      detail << ", " << other << " " << aggregate_line(fig, other, r_f) << (better ? "" : " (<vru)");
    }
  }
  const bench::Aggregate* v = bench::find_aggregate(fig.aggregates, "vru", 1e-3);
  const bench::Aggregate* n = bench::find_aggregate(fig.aggregates, "nft", 1e-3);
  const bool tenfold = v && n && v->geo_mean_excess <= 0.1 * n->geo_mean_excess;
  ok = ok && tenfold;
  detail << "\n    r_f=1e-3 vru/nft = " << (v && n ? fmt("%.4f", v->geo_mean_excess / n->geo_mean_excess) : "n/a")
         << " (<= 0.1); " << fig.records.size() << " records, " << fig.failures.size() << " failures";
  return {ok, detail.str()};
}

// 8. Projection ablation.
Verdict projection_ablation() {
  const UnlearnConfig cfg = digits_config("ablation");
  Workbench wb(cfg);
  const bench::FigureResult fig = bench::run_ablation(wb);
  save(fig, cfg, "ablation");
  bool ok = fig.failures.empty();
  std::ostringstream detail;
  const auto ratios = bench::ablation_ratios(fig.aggregates, cfg.rf);
  ok = ok && ratios.size() == cfg.rf.size();
  for (const auto& r : ratios) {
    ok = ok && r.ratio >= 0.5 && r.ratio <= 2.0;
    detail << " r_f=" << r.r_f << ": " << fmt("%.3f", r.ratio) << ";";
  }
  return {ok, "off/on ratios" + detail.str() + " (within [0.5, 2.0])"};
}

// 9. MIA qualitative reproduction.
Verdict mia_reproduction() {
  const UnlearnConfig cfg = digits_config("fig2");
  Workbench wb(cfg);
  const bench::FigureResult fig = bench::run_fig2(wb);
  save(fig, cfg, "fig2");
  std::map<std::pair<std::string, double>, std::vector<double>> acc;
  double lo = 1.0, hi = 0.0;
  for (const auto& r : fig.records) {
    if (!r.mia_accuracy) continue;
    acc[{r.method, r.r_f}].push_back(*r.mia_accuracy);
    lo = std::min(lo, *r.mia_accuracy);
    hi = std::max(hi, *r.mia_accuracy);
  }
  auto mean = [&](const std::string& m, double r_f) {
    const auto& v = acc[{m, r_f}];
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
  };
  bool ok = fig.failures.empty() && acc.size() == cfg.methods.size() * cfg.rf.size();
  std::ostringstream detail;
  for (double r_f : cfg.rf) {
    detail << "\n    r_f=" << r_f << ":";
    for (const auto& m : cfg.methods) {
      const double a = mean(m, r_f);
      ok = ok && a >= 0.40 && a <= 0.80;
      detail << " " << m << " " << fmt("%.3f", a);
    }
  }
  const double ft = mean("fine_tune", 3e-3), vr = mean("vru", 3e-3);
  ok = ok && ft >= vr;
  detail << "\n    fine_tune >= vru at r_f=3e-3: " << (ft >= vr ? "yes" : "no")
         << "; 3-seed means in [0.40, 0.80]; single-seed range [" << fmt("%.3f", lo) << ", "
         << fmt("%.3f", hi) << "]";
  return {ok, detail.str()};
}

// 10. Optimization loop against a straight-line reference.
Verdict oracle_equivalence() {
  Vector a(2);
  a << 1.0, 2.0;
  const double lambda = 0.5;
  const QuadraticLoss loss(a, lambda);
  RngStream data_rng(1010);
  PointSet retain, forget;
  for (int i = 0; i < 40; ++i) {
    Vector p(2);
    p << 3.0 * data_rng.normal(), data_rng.normal();
    (i < 36 ? retain : forget).points.push_back(p);
  }
  PointSet all = retain;
  all.points.insert(all.points.end(), forget.points.begin(), forget.points.end());
  const Vector star = loss.optimum(all);
  const double r_f = 4.0 / 40.0;
  const std::int64_t steps = 10000;

  std::vector<Vector> iterates;
  VruConfig cfg;
  cfg.steps = steps;
  RngStream rng(1011);
  vru_run(loss, retain, forget, r_f, star, PrivacyBudget::direct(0.0), cfg, rng,
          [&](std::int64_t, const Vector& t) { iterates.push_back(t); });

  // Reference, written out coordinate by coordinate.
  const double ratio = r_f / (1.0 - r_f);
  const double mu = std::min(a[0], a[1]) + lambda;
  double gf[2] = {0.0, 0.0};
  for (const Vector& x : forget.points)
    for (int j = 0; j < 2; ++j) gf[j] += (a[j] * (star[j] - x[j]) + lambda * star[j]) / 4.0;
  const double radius = ratio * std::sqrt(gf[0] * gf[0] + gf[1] * gf[1]) / mu;
  double th[2] = {star[0], star[1]};
  RngStream ref(1011);
  double worst = 0.0;
  bool sizes = iterates.size() == static_cast<std::size_t>(steps);
  for (std::int64_t t = 1; t <= steps && sizes; ++t) {
    const Vector& xi = retain.points[ref.uniform_index(retain.size())];
    const double lr = 1.0 / (mu * static_cast<double>(t));
    double next[2];
    for (int j = 0; j < 2; ++j) {
      const double g = (a[j] * (th[j] - xi[j]) + lambda * th[j]) -
                       (a[j] * (star[j] - xi[j]) + lambda * star[j]) - ratio * gf[j];
      next[j] = th[j] - lr * g;
    }
    const double dx = next[0] - star[0], dy = next[1] - star[1];
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist > radius) {
      next[0] = star[0] + radius / dist * dx;
      next[1] = star[1] + radius / dist * dy;
    }
    th[0] = next[0];
    th[1] = next[1];
    const Vector& it = iterates[static_cast<std::size_t>(t - 1)];
    worst = std::max({worst, std::abs(it[0] - th[0]), std::abs(it[1] - th[1])});
  }
  return {sizes && worst <= 1e-12,
          std::to_string(iterates.size()) + " iterates, max |difference| = " + fmt("%.2e", worst) +
              " (<= 1e-12)"};
}

// 11. Determinism and budget parity of the fig1 smoke run.
Verdict determinism_and_parity() {
  UnlearnConfig cfg = digits_config("fig1");
  cfg.seeds = {0};
  auto run = [&] {
    Workbench wb(cfg);
    const bench::FigureResult fig = bench::run_fig1(wb);
    std::ostringstream records, aggregates;
    bench::write_records(records, fig.config_hash, fig.records, fig.failures);
    bench::write_aggregates(aggregates, fig.config_hash, fig.aggregates);
    return std::make_pair(fig, records.str() + aggregates.str());
  };
  const auto [fig, first] = run();
  const auto second = run().second;
  save(fig, cfg, "fig1_smoke");
  std::int64_t worst_spread = 0;
  for (double r_f : cfg.rf) {
    std::int64_t lo = INT64_MAX, hi = 0;
    for (const auto& r : fig.records)
      if (r.r_f == r_f) {
        lo = std::min(lo, r.budget_used);
        hi = std::max(hi, r.budget_used);
      }
    worst_spread = std::max(worst_spread, hi - lo);
  }
  const bool identical = first == second;
  const bool ok = identical && fig.failures.empty() && fig.records.size() == 25 &&
                  worst_spread <= static_cast<std::int64_t>(cfg.batch_size);
  return {ok, std::string(identical ? "byte-identical" : "DIFFERENT") + " CSVs across two runs, " +
                  std::to_string(fig.records.size()) + " records, max budget spread " +
                  std::to_string(worst_spread) + " units (<= one batch of " +
                  std::to_string(cfg.batch_size) + ")"};
}

// 12. U-LiRA on the two-Gaussian score model.
Verdict ulira_sanity() {
  RngStream rng(1212);
  ScoreTable table;
  const int n = 10000, shadows = 100;
  for (int i = 0; i < n; ++i) {
    const bool member = i < n / 2;
    std::vector<double> in(shadows), out(shadows);
    for (double& v : in) v = 1.0 + rng.normal();
    for (double& v : out) v = -1.0 + rng.normal();
    table.member_hypothesis.push_back(std::move(in));
    table.nonmember_hypothesis.push_back(std::move(out));
    table.audited.push_back((member ? 1.0 : -1.0) + rng.normal());
    table.is_member.push_back(member);
  }
  const double acc = ulira_scores(table).accuracy;
  const double phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  RngStream mc(1213);
  int correct = 0;
  for (int i = 0; i < 1000000; ++i) {
    const bool member = i % 2 == 0;
    const double s = (member ? 1.0 : -1.0) + mc.normal();
    correct += (s > 0.0) == member;
  }
  const double oracle = correct / 1e6;
  return {std::abs(acc - phi1) <= 0.03,
          "accuracy " + fmt("%.4f", acc) + " vs Phi(1) = " + fmt("%.4f", phi1) +
              " (Monte Carlo oracle " + fmt("%.4f", oracle) + "), tolerance 0.03"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      out_dir = argv[++i];
    } else {
      wanted.insert(std::atoi(arg.c_str()));
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "estimator unbiasedness", 60, estimator_unbiased},
      {2, "optima proximity", 300, optima_proximity},
      {3, "estimator norm bound", 60, estimator_norm_bound},
      {4, "gaussian mechanism calibration", 60, noise_calibration},
      {5, "convergence trend", 600, convergence_trend},
      {6, "forget-fraction scaling", 600, rf_scaling},
      {7, "fig1 ordering", 3600, figure1_ordering},
      {8, "projection ablation", 1800, projection_ablation},
      {9, "membership inference", 3600, mia_reproduction},
      {10, "oracle equivalence", 60, oracle_equivalence},
      {11, "determinism and budget parity", 300, determinism_and_parity},
      {12, "u-lira statistical sanity", 60, ulira_sanity},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s; %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failures;
}
