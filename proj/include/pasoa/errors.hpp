/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace pasoa {

// Bad user input (config, CLI flags, malformed files). CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Runtime failures during a run. CLI exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every particle has zero likelihood for the current observation: the
// normalized weights would be 0/0.
class DegenerateWeightsError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// A stochastic gradient evaluated to NaN/Inf; the optimization run aborts.
class NonFiniteGradientError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// Observation outside the model support.
class InvalidObservationError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

}  // namespace pasoa
