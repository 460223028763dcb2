// SPDX-License-Identifier: Apache-2.0
//
// aliaslab - microphone-array spatial aliasing laboratory
// Copyright (C) 2026 The aliaslab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aliaslab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kDefaultSpeedOfSound = 343.0; // m/s, air at 20 degC
inline constexpr double kDefaultSampleRate = 16000.0;

// Precondition / argument violations. The CLI maps these to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file or directory the operation depends on does not exist or is unreadable.
// Exit code 2.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular matrices, non-finite intermediate values. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline double db_from_power(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double db_from_amplitude(double amplitude_ratio) { return 20.0 * std::log10(amplitude_ratio); }

} // namespace aliaslab
