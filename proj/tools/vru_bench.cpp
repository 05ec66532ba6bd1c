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

// vru_bench: command-line driver for the unlearning benchmarks.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "vru/bench/config.hpp"
#include "vru/bench/experiments.hpp"
#include "vru/bench/model_io.hpp"
#include "vru/bench/records.hpp"
#include "vru/errors.hpp"

namespace {

using vru::bench::UnlearnConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRun = 4;

struct Overrides {
  std::string config;
  std::string method;
  std::string rf;
  std::optional<double> epochs;
  std::optional<double> kappa;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::string seeds;
  std::string projection;
  std::string mode;
  std::string out_dir;
  std::string dataset;
  bool no_timing = false;
  bool save_models = false;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--method", o.method, "method or comma-separated methods");
  cmd->add_option("--rf", o.rf, "forget fraction(s), comma-separated");
  cmd->add_option("--epochs", o.epochs, "budget in full-dataset epochs");
  cmd->add_option("--kappa", o.kappa, "noise multiplier");
  cmd->add_option("--epsilon", o.epsilon, "privacy epsilon (kappa derived with delta)");
  cmd->add_option("--delta", o.delta, "privacy delta");
  cmd->add_option("--seeds", o.seeds, "seeds, e.g. 0-29 or 0,1,2");
  cmd->add_option("--projection", o.projection, "on, off or both");
  cmd->add_option("--mode", o.mode, "empirical or theoretical");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--dataset", o.dataset, "CSV dataset path or 'synthetic'");
  cmd->add_flag("--no-timing", o.no_timing, "write wall_ms = 0");
  cmd->add_flag("--save-models", o.save_models, "write pre/post-noise model files");
  cmd->add_option("--set", o.set, "extra key=value override (repeatable)");
}

UnlearnConfig build_config(const std::string& preset, const Overrides& o) {
  UnlearnConfig cfg = UnlearnConfig::preset(preset);
  if (!o.config.empty()) vru::bench::apply_config_file(cfg, o.config);
  auto put = [&](const std::string& k, const std::string& v) {
    if (!v.empty()) cfg.set(k, v);
  };
  auto put_real = [&](const std::string& k, const std::optional<double>& v) {
    if (v) cfg.set(k, vru::bench::format_17(*v));
  };
  put("dataset", o.dataset);
  put("methods", o.method);
  put("rf", o.rf);
  put_real("epochs", o.epochs);
  put_real("kappa", o.kappa);
  put_real("epsilon", o.epsilon);
  put_real("delta", o.delta);
  put("seeds", o.seeds);
  put("projection", o.projection);
  put("mode", o.mode);
  put("out_dir", o.out_dir);
  for (const std::string& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw vru::ConfigError("--set expects key=value, got " + kv);
    cfg.set(vru::bench::detail::trim_copy(kv.substr(0, eq)),
            vru::bench::detail::trim_copy(kv.substr(eq + 1)));
  }
  if (o.no_timing) cfg.timing = false;
  if (o.save_models) cfg.save_models = true;
  cfg.validate();
  return cfg;
}

void require_methods(const UnlearnConfig& cfg, const std::vector<std::string>& allowed,
                     const std::string& cmd) {
  for (const auto& m : cfg.methods)
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end())
      throw vru::ConfigError(cmd + " does not run method " + m);
}

int report(const vru::bench::FigureResult& fig, const UnlearnConfig& cfg,
           const std::string& stem) {
  vru::bench::write_figure(fig, cfg, stem);
  std::cout << "wrote " << fig.records.size() << " records to "
            << (std::filesystem::path(cfg.out_dir) / (stem + "_records.csv")).string() << "\n";
  for (const auto& f : fig.failures)
    std::cerr << "run failed: " << f.method << " r_f=" << f.r_f << " seed=" << f.seed
              << ": " << f.message << "\n";
  return fig.failures.empty() ? kExitOk : kExitRun;
}

int cmd_train(const UnlearnConfig& cfg) {
  vru::bench::Workbench wb(cfg, &std::cerr);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / "theta_star.model").string();
  vru::bench::save_model(path, wb.spec(), wb.theta_star());
  const double gn = wb.loss().batch_grad(wb.theta_star(), wb.pool()).norm();
  std::cout << "samples " << wb.pool().size() << " dim " << wb.spec().dim()
            << " mu " << wb.spec().mu << " beta_bound " << wb.spec().beta_bound
            << " grad_norm " << gn << "\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_split(const UnlearnConfig& cfg) {
  vru::bench::Workbench wb(cfg, &std::cerr);
  std::filesystem::create_directories(cfg.out_dir);
  for (double r_f : cfg.rf) {
    for (std::uint64_t seed : cfg.seeds) {
      const vru::DataSplit split = wb.split_for(r_f, seed);
      const std::string name = "split_rf" + vru::bench::format_17(r_f) + "_seed" +
                               std::to_string(seed) + ".csv";
      std::ofstream out(std::filesystem::path(cfg.out_dir) / name);
      if (!out) throw vru::DataError("cannot write " + name);
      out << "# r_f=" << vru::bench::format_17(split.r_f) << "\nindex,role\n";
      for (auto i : split.retain_index) out << i << ",retain\n";
      for (auto i : split.forget_index) out << i << ",forget\n";
      for (auto i : split.test_index) out << i << ",test\n";
      std::cout << name << ": retain " << split.retain.size() << " forget "
                << split.forget.size() << " test " << split.test.size() << "\n";
    }
  }
  return kExitOk;
}

int cmd_aggregate(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<vru::bench::RunRecord> records;
  std::uint64_t hash = 0;
  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw vru::DataError("cannot open " + path);
    auto file = vru::bench::read_records(in, path);
    hash = file.config_hash;
    records.insert(records.end(), file.records.begin(), file.records.end());
  }
  const auto table = vru::bench::aggregate(records);
  if (out_path.empty()) {
    vru::bench::write_aggregates(std::cout, hash, table);
  } else {
    std::ofstream out(out_path);
    if (!out) throw vru::DataError("cannot write " + out_path);
    vru::bench::write_aggregates(out, hash, table);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified machine unlearning benchmarks"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<std::string> agg_inputs;
  std::string agg_out;

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs = {
      {"train", "train the original model on the training pool"},
      {"split", "write retain/forget/test index files"},
      {"unlearn", "run unlearning methods and record excess risk"},
      {"retrain", "run retraining baselines and record excess risk"},
      {"mia", "unlearn and audit with U-LiRA"},
      {"fig1", "certified comparison sweep"},
      {"fig2", "privacy-utility sweep with membership inference"},
      {"ablation", "VRU with and without projection"},
  };
  for (const Sub& s : subs) add_common(app.add_subcommand(s.name, s.help), o);
  CLI::App* agg = app.add_subcommand("aggregate", "aggregate result CSVs");
  agg->add_option("records", agg_inputs, "record CSV files")->required();
  agg->add_option("-o,--output", agg_out, "aggregate CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "aggregate") return cmd_aggregate(agg_inputs, agg_out);

    const std::string preset =
        name == "fig2" || name == "mia" ? "fig2" : name == "ablation" ? "ablation"
                                                 : name == "fig1" ? "fig1" : "single";
    UnlearnConfig cfg = build_config(preset, o);
    if (name == "train") return cmd_train(cfg);
    if (name == "split") return cmd_split(cfg);
    if (name == "unlearn")
      require_methods(cfg, {"vru", "nft", "fine_tune", "neggrad_plus", "scrub"}, name);
    if (name == "retrain") {
      if (o.method.empty()) cfg.methods = {"sgd"};
      require_methods(cfg, {"gd", "sgd", "svrg"}, name);
    }
    vru::bench::Workbench wb(cfg, &std::cerr);
    if (name == "fig2" || name == "mia") return report(vru::bench::run_fig2(wb), cfg, name);
    return report(vru::bench::run_sweep(wb), cfg, name);
  } catch (const vru::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vru::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vru::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRun;
  }
}
