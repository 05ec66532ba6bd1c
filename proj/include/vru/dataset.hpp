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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vru/errors.hpp"
#include "vru/rng.hpp"

namespace vru {

// One labelled data point.
struct Sample {
  Vector features;
  int label = 0;
};

// Row-major labelled sample matrix. Rows are samples; the bias coordinate is
// implicit and never stored.
class Dataset {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>;

  Dataset() = default;

  Dataset(Matrix features, std::vector<int> labels, int num_classes)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        num_classes_(num_classes) {
    if (static_cast<std::size_t>(features_.rows()) != labels_.size())
      throw ConfigError("dataset: feature rows and labels differ in length");
    for (int y : labels_) {
      if (y < 0 || y >= num_classes_)
        throw DataError("dataset: label " + std::to_string(y) +
                        " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }

  static Dataset from_samples(std::span<const Sample> samples,
                              int num_classes) {
    if (samples.empty()) return Dataset(Matrix(0, 0), {}, num_classes);
    const auto s = samples.front().features.size();
    Matrix x(static_cast<Eigen::Index>(samples.size()), s);
    std::vector<int> y;
    y.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].features.size() != s)
        throw ConfigError("dataset: ragged feature vectors");
      x.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
      y.push_back(samples[i].label);
    }
    return Dataset(std::move(x), std::move(y), num_classes);
  }

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  int num_classes() const { return num_classes_; }

  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  auto row(std::size_t i) const {
    return features_.row(static_cast<Eigen::Index>(i));
  }

  Sample sample(std::size_t i) const {
    return Sample{row(i).transpose(), labels_[i]};
  }

  Dataset subset(std::span<const std::size_t> index) const {
    Matrix x(static_cast<Eigen::Index>(index.size()), features_.cols());
    std::vector<int> y;
    y.reserve(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) {
      x.row(static_cast<Eigen::Index>(k)) = row(index[k]);
      y.push_back(labels_[index[k]]);
    }
    return Dataset(std::move(x), std::move(y), num_classes_);
  }

  Dataset concat(const Dataset& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    if (other.feature_dim() != feature_dim())
      throw ConfigError("dataset: cannot concatenate different widths");
    Matrix x(features_.rows() + other.features_.rows(), features_.cols());
    x << features_, other.features_;
    std::vector<int> y = labels_;
    y.insert(y.end(), other.labels_.begin(), other.labels_.end());
    return Dataset(std::move(x), std::move(y),
                   std::max(num_classes_, other.num_classes_));
  }

  std::vector<std::size_t> class_histogram() const {
    std::vector<std::size_t> h(static_cast<std::size_t>(num_classes_), 0);
    for (int y : labels_) ++h[static_cast<std::size_t>(y)];
    return h;
  }

 private:
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

// Retain / forget / test partition. Index vectors refer to the dataset the
// split was drawn from.
struct DataSplit {
  Dataset retain;
  Dataset forget;
  Dataset test;
  double r_f = 0.0;
  std::vector<std::size_t> retain_index;
  std::vector<std::size_t> forget_index;
  std::vector<std::size_t> test_index;

  // r_f / (1 - r_f) = |forget| / |retain|.
  double ratio() const { return r_f / (1.0 - r_f); }
  Dataset train() const { return retain.concat(forget); }
};

struct TrainTestSplit {
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
};

namespace detail {

// Partial Fisher-Yates: the first k entries become a uniform draw without
// replacement.
inline void shuffle_prefix(std::vector<std::size_t>& items, std::size_t k,
                           RngStream& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(items.size() - i);
    std::swap(items[i], items[j]);
  }
}

}  // namespace detail

// Holds out round(test_fraction * n) samples, drawn uniformly without
// replacement. Both index lists are returned in ascending order.
inline TrainTestSplit split_train_test(std::size_t n, double test_fraction,
                                       RngStream& rng) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw UsageError("test_fraction must lie in [0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  detail::shuffle_prefix(order, n_test, rng);
  TrainTestSplit out;
  out.test_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(out.test_index.begin(), out.test_index.end());
  std::sort(out.train_index.begin(), out.train_index.end());
  return out;
}

// Draws the forget set uniformly without replacement from the training pool
// and fills the split. |forget| = round(r_f * |pool|); the stored r_f is
// recomputed from the realised counts.
inline DataSplit draw_forget(const Dataset& data,
                             std::span<const std::size_t> pool,
                             std::span<const std::size_t> test_index,
                             double r_f, RngStream& rng) {
  if (!(r_f > 0.0 && r_f < 1.0)) throw UsageError("r_f must lie in (0, 1)");
  const auto n_forget = static_cast<std::size_t>(
      std::llround(r_f * static_cast<double>(pool.size())));
  if (n_forget == 0)
    throw UsageError("forget set would be empty: r_f * |train pool| < 0.5");
  if (n_forget >= pool.size())
    throw UsageError("forget set would consume the whole training pool");

  std::vector<std::size_t> order(pool.begin(), pool.end());
  detail::shuffle_prefix(order, n_forget, rng);
  DataSplit split;
  split.forget_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_forget));
  split.retain_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_forget), order.end());
  std::sort(split.forget_index.begin(), split.forget_index.end());
  std::sort(split.retain_index.begin(), split.retain_index.end());
  split.test_index.assign(test_index.begin(), test_index.end());

  split.retain = data.subset(split.retain_index);
  split.forget = data.subset(split.forget_index);
  split.test = data.subset(split.test_index);
  split.r_f = static_cast<double>(n_forget) /
              static_cast<double>(n_forget + split.retain_index.size());
  return split;
}

// Test split first, then the forget draw from the remaining pool, both from
// `rng`.
inline DataSplit make_split(const Dataset& data, double r_f,
                            double test_fraction, RngStream& rng) {
  const TrainTestSplit tt = split_train_test(data.size(), test_fraction, rng);
  return draw_forget(data, tt.train_index, tt.test_index, r_f, rng);
}

// ---------------------------------------------------------------------------
// CSV I/O. Header row required; columns f_0..f_{s-1} then an integer label.

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw DataError(source + ": missing header row");
  ++line_no;
  const auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() < 2)
    throw DataError(source + ": header needs at least one feature and a label");
  const std::size_t s = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    const auto cells = detail::split_csv_line(text);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != s + 1)
      throw DataError(where + ": expected " + std::to_string(s + 1) +
                      " columns, found " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < s; ++j) {
      const std::string_view cell = detail::trim(cells[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(where + ": column " + std::to_string(j) +
                        " is not a number");
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError(where + ": feature " + std::to_string(j) +
                        " outside [0, 1]");
      values.push_back(v);
    }
    const std::string_view cell = detail::trim(cells[s]);
    int y = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || y < 0)
      throw DataError(where + ": label is not a non-negative integer");
    labels.push_back(y);
  }
  if (labels.empty()) throw DataError(source + ": dataset has no rows");

  Dataset::Matrix x(static_cast<Eigen::Index>(labels.size()),
                    static_cast<Eigen::Index>(s));
  std::copy(values.begin(), values.end(), x.data());
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  return Dataset(std::move(x), std::move(labels), classes);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path);
  return parse_dataset(in, path);
}

inline void write_dataset(std::ostream& out, const Dataset& data) {
  for (int j = 0; j < data.feature_dim(); ++j) out << "f_" << j << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.feature_dim(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf,
                                     data.features()(static_cast<Eigen::Index>(i), j));
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << data.label(i) << '\n';
  }
}

// ---------------------------------------------------------------------------

struct BlobSpec {
  std::size_t n = 600;
  int feature_dim = 20;
  int num_classes = 3;
  double separation = 0.3;  // distance of class centres from the cube centre
  double spread = 0.12;     // per-coordinate standard deviation
};

// Gaussian class blobs clipped to [0, 1]^s, labels cycling over classes.
inline Dataset make_blobs(const BlobSpec& spec, RngStream& rng) {
  const int s = spec.feature_dim;
  const int c = spec.num_classes;
  Eigen::MatrixXd centres(c, s);
  for (int k = 0; k < c; ++k) {
    Vector dir(s);
    for (int j = 0; j < s; ++j) dir[j] = rng.normal();
    dir /= dir.norm();
    centres.row(k) = (Vector::Constant(s, 0.5) + spec.separation * dir).transpose();
  }
  Dataset::Matrix x(static_cast<Eigen::Index>(spec.n), s);
  std::vector<int> y(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int k = static_cast<int>(i % static_cast<std::size_t>(c));
    y[i] = k;
    for (int j = 0; j < s; ++j) {
      const double v = centres(k, j) + spec.spread * rng.normal();
      x(static_cast<Eigen::Index>(i), j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return Dataset(std::move(x), std::move(y), c);
}

}  // namespace vru
