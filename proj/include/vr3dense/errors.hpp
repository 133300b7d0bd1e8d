// Copyright 2026 The VR3Dense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>

namespace vr3dense {

/// Malformed or truncated input (binary payloads, label/calib text, images).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a precondition.
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A calibration is unusable (singular transform, bad intrinsics).
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric is undefined for the given inputs (e.g. no ground truth).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The finite-difference oracle hit a non-finite function value.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative optimization diverged or produced a non-finite loss.
class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown entries in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vr3dense
