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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vru {

// Root of the library's exception hierarchy. The CLI maps subclasses to
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration: dimension mismatches, bad hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-range input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double grad_norm,
                   std::int64_t iterations)
      : Error(what), grad_norm_(grad_norm), iterations_(iterations) {}

  double grad_norm() const { return grad_norm_; }
  std::int64_t iterations() const { return iterations_; }

 private:
  double grad_norm_;
  std::int64_t iterations_;
};

// An optimization run produced a non-finite iterate.
class RunError : public Error {
 public:
  RunError(const std::string& what, std::int64_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace vru
