// Copyright 2026 The leafkit Authors. All Rights Reserved.
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

// Exception types. Each maps to one stable CLI exit code (see tools/leafkit.cpp).

#pragma once

#include <stdexcept>
#include <string>

namespace leafkit {

/// Recordings, manifests or audio that cannot be used (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf or a numerically undefined operation (exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Label sets or class counts that do not agree (exit code 4).
class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files: configs, reports, checkpoints (exit code 5).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not applicable to the configured frontend (exit code 6).
class ModeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace leafkit
