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
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "vru/errors.hpp"
#include "vru/logistic.hpp"

namespace vru::bench {

// Text model file: a header line "# vru-model classes=C features=s dim=d"
// followed by one parameter per line at 17 significant digits.
inline void write_model(std::ostream& out, const LossSpec& spec, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim())
    throw ConfigError("write_model: dimension mismatch");
  out << "# vru-model classes=" << spec.num_classes
      << " features=" << spec.feature_dim << " dim=" << theta.size() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", theta[i]);
    out << buf;
  }
}

inline void save_model(const std::string& path, const LossSpec& spec, const Vector& theta) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path);
  write_model(out, spec, theta);
}

inline Vector read_model(std::istream& in, const std::string& source,
                         int* num_classes = nullptr, int* feature_dim = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty model file");
  int c = 0, s = 0;
  long d = 0;
  if (std::sscanf(line.c_str(), "# vru-model classes=%d features=%d dim=%ld", &c, &s, &d) != 3 ||
      d != static_cast<long>(c) * (s + 1))
    throw DataError(source + ":1: bad model header");
  Vector theta(d);
  for (long i = 0; i < d; ++i) {
    if (!std::getline(in, line)) throw DataError(source + ": truncated model file");
    double x = 0.0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), x);
    if (ec != std::errc() || p != line.data() + line.size())
      throw DataError(source + ":" + std::to_string(i + 2) + ": bad parameter");
    theta[i] = x;
  }
  if (num_classes) *num_classes = c;
  if (feature_dim) *feature_dim = s;
  return theta;
}

inline Vector load_model(const std::string& path, int* num_classes = nullptr,
                         int* feature_dim = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  return read_model(in, path, num_classes, feature_dim);
}

}  // namespace vru::bench
