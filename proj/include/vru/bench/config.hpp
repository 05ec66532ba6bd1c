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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/privacy.hpp"
#include "vru/rng.hpp"
#include "vru/unlearn.hpp"

namespace vru::bench {

struct MethodParams {
  double lr = 0.0;
  double decay = 1.0;
  double alpha = 0.0;
};

// Everything that determines a benchmark's results. Parsed from a flat
// `key = value` file; command-line flags override individual keys.
struct UnlearnConfig {
  std::string experiment = "fig1";
  std::string dataset = "data/digits.csv";  // or "synthetic"
  BlobSpec synthetic;
  double lambda = 0.1;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  double tol = 1e-10;
  std::vector<std::string> methods;
  std::vector<double> rf;
  double epochs = 10.0;
  std::optional<double> kappa;
  std::optional<double> epsilon;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds;
  std::string projection = "on";  // on, off, both
  VruMode mode = VruMode::empirical;
  std::size_t batch_size = 8;
  NoiseCalibration calibration = NoiseCalibration::measured;
  int sensitivity_probes = 5;
  std::string eval_set = "retain";  // or "test"
  int shadows = 5;
  double shadow_tol = 1e-8;
  std::string vru_schedule = "inverse_mu_t";  // or "table"
  std::map<std::string, MethodParams> hyper;

  // Not part of the hash: they do not change any result.
  std::string out_dir = "results";
  bool timing = true;
  bool save_models = false;

  static UnlearnConfig preset(std::string_view experiment);

  void set(const std::string& key, const std::string& value);
  void validate() const;
  double kappa_value() const;
  PrivacyBudget privacy() const;
  MethodParams params(const std::string& method) const;
  std::string canonical() const;
  std::uint64_t hash() const { return detail::fnv1a(canonical()); }
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end)
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_copy(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "0-29", "0,1,2" or a mix of both.
inline std::vector<std::uint64_t> parse_seeds(const std::string& key,
                                              const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(v)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      const auto s = parse_int(key, item);
      if (s < 0) throw ConfigError("config: negative seed");
      out.push_back(static_cast<std::uint64_t>(s));
      continue;
    }
    const auto lo = parse_int(key, trim_copy(item.substr(0, dash)));
    const auto hi = parse_int(key, trim_copy(item.substr(dash + 1)));
    if (lo < 0 || hi < lo) throw ConfigError("config: bad seed range " + item);
    for (auto s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects on/off, got '" + v + "'");
}

inline std::string format_real(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

}  // namespace detail

inline std::string_view to_string(VruMode m) {
  return m == VruMode::empirical ? "empirical" : "theoretical";
}

inline std::string_view to_string(NoiseCalibration c) {
  switch (c) {
    case NoiseCalibration::certified: return "certified";
    case NoiseCalibration::unit: return "unit";
    case NoiseCalibration::measured: return "measured";
  }
  return "?";
}

inline const std::map<std::string, MethodParams>& table_defaults(
    std::string_view experiment) {
  static const std::map<std::string, MethodParams> certified = {
      {"vru", {1.1, 0.55, 0.0}}, {"nft", {0.3, 0.8, 0.0}},
      {"gd", {2.0, 0.8, 0.0}},   {"svrg", {1.0, 0.4, 0.0}},
      {"sgd", {0.5, 0.9, 0.0}},  {"fine_tune", {5e-3, 0.8, 0.0}},
      {"neggrad_plus", {3e-3, 0.7, 5e-3}}, {"scrub", {5e-3, 0.8, 5e-3}}};
  static const std::map<std::string, MethodParams> empirical = [] {
    auto m = certified;
    m["vru"] = {1.0, 0.6, 0.0};
    return m;
  }();
  return experiment == "fig2" ? empirical : certified;
}

inline bool known_method(std::string_view m) {
  return table_defaults("fig1").count(std::string(m)) > 0;
}

inline UnlearnConfig UnlearnConfig::preset(std::string_view experiment) {
  UnlearnConfig c;
  c.experiment = std::string(experiment);
  c.seeds = detail::parse_seeds("seeds", "0-29");
  if (experiment == "fig2") {
    c.methods = {"vru", "fine_tune", "neggrad_plus", "scrub"};
    c.rf = {3e-3, 2e-2, 1e-1};
    c.epochs = 5.0;
    c.kappa = 0.1;
    c.seeds = {0, 1, 2};
    c.calibration = NoiseCalibration::unit;
  } else if (experiment == "ablation") {
    c.methods = {"vru"};
    c.rf = {1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1};
    c.kappa = 0.1;
    c.projection = "both";
    c.calibration = NoiseCalibration::unit;
  } else if (experiment == "fig1") {
    c.methods = {"vru", "nft", "gd", "sgd", "svrg"};
    c.rf = {1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1};
    c.kappa = 1.0;
  } else {
    // single runs: unlearn / retrain / mia
    c.methods = {"vru"};
    c.rf = {1e-2};
    c.kappa = 1.0;
    c.seeds = {0};
  }
  return c;
}

inline void UnlearnConfig::set(const std::string& key, const std::string& value) {
  using namespace detail;
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string group = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    if (group == "synthetic") {
      if (name == "n") synthetic.n = static_cast<std::size_t>(parse_int(key, value));
      else if (name == "dim") synthetic.feature_dim = static_cast<int>(parse_int(key, value));
      else if (name == "classes") synthetic.num_classes = static_cast<int>(parse_int(key, value));
      else if (name == "separation") synthetic.separation = parse_real(key, value);
      else if (name == "spread") synthetic.spread = parse_real(key, value);
      else throw ConfigError("config: unknown key " + key);
      return;
    }
    if (group == "lr" || group == "decay" || group == "alpha") {
      if (!known_method(name)) throw ConfigError("config: unknown method in " + key);
      MethodParams p = params(name);
      const double x = parse_real(key, value);
      (group == "lr" ? p.lr : group == "decay" ? p.decay : p.alpha) = x;
      hyper[name] = p;
      return;
    }
    throw ConfigError("config: unknown key " + key);
  }
  if (key == "experiment") experiment = value;
  else if (key == "dataset") dataset = value;
  else if (key == "lambda") lambda = parse_real(key, value);
  else if (key == "test_fraction") test_fraction = parse_real(key, value);
  else if (key == "split_seed") split_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "tol") tol = parse_real(key, value);
  else if (key == "methods" || key == "method") methods = split_list(value);
  else if (key == "rf") {
    rf.clear();
    for (const auto& s : split_list(value)) rf.push_back(parse_real(key, s));
  }
  else if (key == "epochs") epochs = parse_real(key, value);
  else if (key == "kappa") { kappa = parse_real(key, value); epsilon.reset(); }
  else if (key == "epsilon") { epsilon = parse_real(key, value); kappa.reset(); }
  else if (key == "delta") delta = parse_real(key, value);
  else if (key == "seeds") seeds = parse_seeds(key, value);
  else if (key == "projection") {
    if (value == "both") projection = value;
    else projection = parse_bool(key, value) ? "on" : "off";
  }
  else if (key == "mode") {
    if (value == "empirical") mode = VruMode::empirical;
    else if (value == "theoretical") mode = VruMode::theoretical;
    else throw ConfigError("config: mode expects empirical or theoretical");
  }
  else if (key == "batch_size") batch_size = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "calibration") {
    if (value == "certified") calibration = NoiseCalibration::certified;
    else if (value == "unit") calibration = NoiseCalibration::unit;
    else if (value == "measured") calibration = NoiseCalibration::measured;
    else throw ConfigError("config: calibration expects certified, unit or measured");
  }
  else if (key == "sensitivity_probes") sensitivity_probes = static_cast<int>(parse_int(key, value));
  else if (key == "eval_set") eval_set = value;
  else if (key == "shadows") shadows = static_cast<int>(parse_int(key, value));
  else if (key == "shadow_tol") shadow_tol = parse_real(key, value);
  else if (key == "vru_schedule") {
    if (value != "table" && value != "inverse_mu_t")
      throw ConfigError("config: vru_schedule expects table or inverse_mu_t");
    vru_schedule = value;
  }
  else if (key == "out_dir") out_dir = value;
  else if (key == "timing") timing = parse_bool(key, value);
  else if (key == "save_models") save_models = parse_bool(key, value);
  else throw ConfigError("config: unknown key " + key);
}

inline void UnlearnConfig::validate() const {
  if (methods.empty()) throw ConfigError("config: no methods");
  for (const auto& m : methods)
    if (!known_method(m)) throw ConfigError("config: unknown method " + m);
  if (rf.empty()) throw ConfigError("config: empty r_f grid");
  for (double r : rf)
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("config: r_f must lie in (0, 1)");
  if (seeds.empty()) throw ConfigError("config: no seeds");
  if (!(epochs > 0.0)) throw ConfigError("config: epochs must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("config: lambda must be > 0");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("config: test_fraction must lie in (0, 1)");
  if (!(tol > 0.0) || !(shadow_tol > 0.0)) throw ConfigError("config: tolerances must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: delta must lie in (0, 1)");
  if (kappa && *kappa < 0.0) throw ConfigError("config: kappa must be >= 0");
  if (epsilon && !(*epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  if (!kappa && !epsilon) throw ConfigError("config: set kappa or epsilon");
  if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
  if (sensitivity_probes < 2) throw ConfigError("config: sensitivity_probes must be >= 2");
  if (shadows < 2) throw ConfigError("config: shadows must be >= 2");
  if (eval_set != "test" && eval_set != "retain")
    throw ConfigError("config: eval_set expects test or retain");
  for (const auto& [m, p] : hyper) {
    if (!(p.lr > 0.0)) throw ConfigError("config: lr." + m + " must be > 0");
    if (!(p.decay > 0.0 && p.decay <= 1.0))
      throw ConfigError("config: decay." + m + " must lie in (0, 1]");
    if (p.alpha < 0.0) throw ConfigError("config: alpha." + m + " must be >= 0");
  }
}

inline double UnlearnConfig::kappa_value() const {
  if (kappa) return *kappa;
  if (epsilon) return kappa_dp(*epsilon, delta);
  throw ConfigError("config: set kappa or epsilon");
}

inline PrivacyBudget UnlearnConfig::privacy() const {
  if (epsilon && !kappa) return PrivacyBudget::from_epsilon_delta(*epsilon, delta);
  return PrivacyBudget::direct(kappa_value(), delta);
}

inline MethodParams UnlearnConfig::params(const std::string& method) const {
  if (auto it = hyper.find(method); it != hyper.end()) return it->second;
  const auto& table = table_defaults(experiment);
  if (auto it = table.find(method); it != table.end()) return it->second;
  throw ConfigError("config: unknown method " + method);
}

inline std::string UnlearnConfig::canonical() const {
  using detail::format_real;
  std::map<std::string, std::string> kv;
  kv["experiment"] = experiment;
  kv["dataset"] = dataset;
  if (dataset == "synthetic") {
    kv["synthetic.n"] = std::to_string(synthetic.n);
    kv["synthetic.dim"] = std::to_string(synthetic.feature_dim);
    kv["synthetic.classes"] = std::to_string(synthetic.num_classes);
    kv["synthetic.separation"] = format_real(synthetic.separation);
    kv["synthetic.spread"] = format_real(synthetic.spread);
  }
  kv["lambda"] = format_real(lambda);
  kv["test_fraction"] = format_real(test_fraction);
  kv["split_seed"] = std::to_string(split_seed);
  kv["tol"] = format_real(tol);
  std::string joined;
  for (const auto& m : methods) joined += (joined.empty() ? "" : ",") + m;
  kv["methods"] = joined;
  joined.clear();
  for (double r : rf) joined += (joined.empty() ? "" : ",") + format_real(r);
  kv["rf"] = joined;
  kv["epochs"] = format_real(epochs);
  kv["kappa"] = format_real(kappa_value());
  kv["delta"] = format_real(delta);
  joined.clear();
  for (auto s : seeds) joined += (joined.empty() ? "" : ",") + std::to_string(s);
  kv["seeds"] = joined;
  kv["projection"] = projection;
  kv["mode"] = std::string(to_string(mode));
  kv["batch_size"] = std::to_string(batch_size);
  kv["calibration"] = std::string(to_string(calibration));
  kv["sensitivity_probes"] = std::to_string(sensitivity_probes);
  kv["eval_set"] = eval_set;
  kv["shadows"] = std::to_string(shadows);
  kv["shadow_tol"] = format_real(shadow_tol);
  kv["vru_schedule"] = vru_schedule;
  for (const auto& m : methods) {
    const MethodParams p = params(m);
    kv["lr." + m] = format_real(p.lr);
    kv["decay." + m] = format_real(p.decay);
    kv["alpha." + m] = format_real(p.alpha);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

// `key = value` lines; '#' starts a comment.
inline void apply_config_text(UnlearnConfig& cfg, std::istream& in,
                              const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = detail::trim_copy(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim_copy(body.substr(0, eq));
    const std::string value = detail::trim_copy(body.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_config_file(UnlearnConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  apply_config_text(cfg, in, path);
}

}  // namespace vru::bench
