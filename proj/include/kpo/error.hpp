// Copyright 2026 The kpo-sim Authors
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

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kpo {

enum class ErrorKind {
  invalid_dimension,
  dimension_mismatch,
  zero_vector,
  out_of_range,
  invalid_parameter,
  integration_diverged,
  unidentifiable_angle,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::zero_vector: return "zero-vector";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::integration_diverged: return "integration-diverged";
    case ErrorKind::unidentifiable_angle: return "unidentifiable-angle";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

using WarningHandler = std::function<void(std::string_view)>;

namespace detail {
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::clog << "kpo warning: " << msg << '\n';
  };
  return handler;
}
}  // namespace detail

/// Replaces the process-wide sink for non-fatal diagnostics. Returns the old one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(detail::warning_mutex());
  std::swap(handler, detail::warning_handler());
  return handler;
}

inline void warn(std::string_view msg) {
  std::lock_guard<std::mutex> lock(detail::warning_mutex());
  if (detail::warning_handler()) detail::warning_handler()(msg);
}

}  // namespace kpo
