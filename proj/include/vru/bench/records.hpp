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
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vru/bench/config.hpp"
#include "vru/errors.hpp"

namespace vru::bench {

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::string method;
  double r_f = 0.0;
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  std::optional<double> mia_accuracy;
  std::int64_t budget_used = 0;
  double kappa = 0.0;
  bool projection = true;
  std::string mode = "empirical";
  std::int64_t wall_ms = 0;
  std::string pre_noise_path;
  std::string post_noise_path;
};

// A run that threw; kept so aggregates can report missing seeds.
struct RunFailure {
  std::string method;
  double r_f = 0.0;
  std::uint64_t seed = 0;
  std::string message;
};

inline constexpr const char* kRecordHeader =
    "method,r_f,seed,excess_risk,mia_accuracy,budget_used,kappa,projection,mode,wall_ms";

inline std::string format_17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline void write_records(std::ostream& out, std::uint64_t config_hash,
                          const std::vector<RunRecord>& records,
                          const std::vector<RunFailure>& failures = {}) {
  out << "# config_hash=" << hash_hex(config_hash) << "\n";
  for (const RunFailure& f : failures)
    out << "# failed method=" << f.method << " r_f=" << format_17(f.r_f)
        << " seed=" << f.seed << ": " << f.message << "\n";
  out << kRecordHeader << "\n";
  for (const RunRecord& r : records) {
    out << r.method << ',' << format_17(r.r_f) << ',' << r.seed << ','
        << format_17(r.excess_risk) << ','
        << (r.mia_accuracy ? format_17(*r.mia_accuracy) : std::string()) << ','
        << r.budget_used << ',' << format_17(r.kappa) << ','
        << (r.projection ? "on" : "off") << ',' << r.mode << ',' << r.wall_ms
        << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError(where + ": bad integer '" + s + "'");
  return x;
}

inline double parse_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError(where + ": bad number '" + s + "'");
  return x;
}

}  // namespace detail

struct RecordFile {
  std::uint64_t config_hash = 0;
  std::vector<RunRecord> records;
};

inline RecordFile read_records(std::istream& in, const std::string& source) {
  RecordFile file;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const std::string tag = "# config_hash=";
      if (line.rfind(tag, 0) == 0) {
        const std::string hex = line.substr(tag.size());
        auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(),
                                       file.config_hash, 16);
        if (ec != std::errc()) throw DataError(where + ": bad config hash");
      }
      continue;
    }
    if (!header) {
      if (line != kRecordHeader) throw DataError(where + ": unexpected header");
      header = true;
      continue;
    }
    const auto f = detail::split_fields(line);
    if (f.size() != 10) throw DataError(where + ": expected 10 fields");
    RunRecord r;
    r.config_hash = file.config_hash;
    r.method = f[0];
    r.r_f = detail::parse_double(f[1], where);
    r.seed = detail::parse_u64(f[2], where);
    r.excess_risk = detail::parse_double(f[3], where);
    if (!f[4].empty()) r.mia_accuracy = detail::parse_double(f[4], where);
    r.budget_used = static_cast<std::int64_t>(detail::parse_u64(f[5], where));
    r.kappa = detail::parse_double(f[6], where);
    if (f[7] != "on" && f[7] != "off") throw DataError(where + ": bad projection flag");
    r.projection = f[7] == "on";
    r.mode = f[8];
    r.wall_ms = static_cast<std::int64_t>(detail::parse_u64(f[9], where));
    file.records.push_back(std::move(r));
  }
  if (!header) throw DataError(source + ": missing header");
  return file;
}

inline constexpr double kExcessFloor = 1e-15;

struct Aggregate {
  std::string method;
  double r_f = 0.0;
  bool projection = true;
  double geo_mean_excess = 0.0;
  double band_low = 0.0;
  double band_high = 0.0;
  std::size_t n_seeds = 0;
  std::size_t n_floored = 0;
  bool arithmetic_fallback = false;
  std::size_t n_missing = 0;
};

// Geometric mean with a multiplicative one-standard-deviation band, computed
// in log space after flooring at kExcessFloor. A group with no positive value
// falls back to the arithmetic mean and is flagged.
inline Aggregate aggregate_group(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("aggregate: empty group");
  Aggregate a;
  a.n_seeds = values.size();
  const bool any_positive =
      std::any_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
  if (!any_positive) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    a.geo_mean_excess = a.band_low = a.band_high = mean;
    a.arithmetic_fallback = true;
    return a;
  }
  std::vector<double> logs;
  for (double v : values) {
    if (v < kExcessFloor) ++a.n_floored;
    logs.push_back(std::log(std::max(v, kExcessFloor)));
  }
  double mean = 0.0;
  for (double l : logs) mean += l;
  mean /= static_cast<double>(logs.size());
  double var = 0.0;
  if (logs.size() > 1) {
    for (double l : logs) var += (l - mean) * (l - mean);
    var /= static_cast<double>(logs.size() - 1);
  }
  const double sd = std::sqrt(var);
  a.geo_mean_excess = std::exp(mean);
  a.band_low = std::exp(mean - sd);
  a.band_high = std::exp(mean + sd);
  return a;
}

// One row per (method, r_f, projection) in order of first appearance.
// `expected_seeds` (0 = unknown) sets n_missing.
inline std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records,
                                        std::size_t expected_seeds = 0) {
  using Key = std::tuple<std::string, double, bool>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> groups;
  for (const RunRecord& r : records) {
    Key k{r.method, r.r_f, r.projection};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(r.excess_risk);
  }
  std::vector<Aggregate> out;
  for (const Key& k : order) {
    Aggregate a = aggregate_group(groups[k]);
    a.method = std::get<0>(k);
    a.r_f = std::get<1>(k);
    a.projection = std::get<2>(k);
    if (expected_seeds > a.n_seeds) a.n_missing = expected_seeds - a.n_seeds;
    out.push_back(std::move(a));
  }
  return out;
}

inline const Aggregate* find_aggregate(const std::vector<Aggregate>& table,
                                       const std::string& method, double r_f,
                                       bool projection = true) {
  for (const Aggregate& a : table)
    if (a.method == method && a.r_f == r_f && a.projection == projection) return &a;
  return nullptr;
}

inline constexpr const char* kAggregateHeader =
    "method,r_f,geo_mean_excess,band_low,band_high,n_seeds";

// Rows for projection-off groups carry the method name suffixed with
// "/noproj" so both ablation arms fit the fixed column set.
inline void write_aggregates(std::ostream& out, std::uint64_t config_hash,
                             const std::vector<Aggregate>& table) {
  out << "# config_hash=" << hash_hex(config_hash) << "\n";
  out << "# excess risks floored at " << format_17(kExcessFloor)
      << " before the geometric mean\n";
  for (const Aggregate& a : table) {
    const std::string name = a.method + (a.projection ? "" : "/noproj");
    if (a.n_floored > 0)
      out << "# floored " << name << " r_f=" << format_17(a.r_f) << ": "
          << a.n_floored << " of " << a.n_seeds << "\n";
    if (a.arithmetic_fallback)
      out << "# arithmetic_fallback " << name << " r_f=" << format_17(a.r_f) << "\n";
    if (a.n_missing > 0)
      out << "# missing " << name << " r_f=" << format_17(a.r_f) << ": "
          << a.n_missing << " seeds\n";
  }
  out << kAggregateHeader << "\n";
  for (const Aggregate& a : table) {
    out << a.method << (a.projection ? "" : "/noproj") << ',' << format_17(a.r_f)
        << ',' << format_17(a.geo_mean_excess) << ',' << format_17(a.band_low)
        << ',' << format_17(a.band_high) << ',' << a.n_seeds << "\n";
  }
}

}  // namespace vru::bench
