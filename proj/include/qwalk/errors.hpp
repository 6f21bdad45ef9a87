// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

/// Bad input to a library routine (out-of-range angle, rate, width, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Amplitude would leave the finite lattice during a step.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form quantity is singular or divergent at the requested point
/// (p_C = 0 diffusion constant, theta = pi effective mass, zero detuning).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Too few usable data points for a fit.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Momentum grid too coarse for the lattice support.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Required configuration fields are absent.
class MissingFieldsError : public std::runtime_error {
 public:
  explicit MissingFieldsError(std::vector<std::string> fields)
      : std::runtime_error(format(fields)), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string format(const std::vector<std::string>& fields) {
    std::string msg = "missing required fields:";
    for (const auto& f : fields) msg += " " + f;
    return msg;
  }
  std::vector<std::string> fields_;
};

}  // namespace qwalk
