// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file core.hpp
 * @brief Shared scalar aliases, error types, and the warning sink.
 */

#pragma once

#include <complex>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pilotwave {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called with inputs that violate its contract.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite values (dt too large, corrupt input).
class NumericalFault : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct WarningSink {
  std::mutex mutex;
  std::function<void(std::string_view)> sink = [](std::string_view msg) {
    std::cerr << "pilotwave: warning: " << msg << '\n';
  };
};

inline WarningSink& warning_sink() {
  static WarningSink instance;
  return instance;
}

}  // namespace detail

/// Replace the warning handler. Pass an empty function to silence warnings.
inline void set_warning_sink(std::function<void(std::string_view)> sink) {
  auto& ws = detail::warning_sink();
  std::lock_guard lock(ws.mutex);
  ws.sink = std::move(sink);
}

inline void warn(std::string_view message) {
  auto& ws = detail::warning_sink();
  std::lock_guard lock(ws.mutex);
  if (ws.sink) ws.sink(message);
}

}  // namespace pilotwave
