// Copyright 2026 The qsalab Authors
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

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qsalab {

/// Broad failure class. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  usage = 2,
  data = 3,
  numerical = 4,
};

/// Base of every exception thrown by the library. `stage()` names the module
/// (or pipeline stage) that detected the problem.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  DomainError(std::string stage, const std::string& what)
      : Error(ErrorKind::data, std::move(stage), what) {}
};

/// Instance has no cost gap (all energies equal).
class DegenerateInstanceError : public DomainError {
 public:
  explicit DegenerateInstanceError(std::string stage)
      : DomainError(std::move(stage),
                    "degenerate instance: all energies are equal, cost gap undefined") {}
};

/// Malformed or inconsistent input document.
class SchemaError : public Error {
 public:
  SchemaError(std::string stage, const std::string& what)
      : Error(ErrorKind::data, std::move(stage), what) {}
};

/// Problem size above a configured memory or dense-algebra cap.
class CapError : public Error {
 public:
  CapError(std::string stage, const std::string& what)
      : Error(ErrorKind::data, std::move(stage), what) {}
};

/// Linear algebra failure or a numerical post-condition violation.
class NumericalError : public Error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : Error(ErrorKind::numerical, std::move(stage), what) {}
};

class UsageError : public Error {
 public:
  UsageError(std::string stage, const std::string& what)
      : Error(ErrorKind::usage, std::move(stage), what) {}
};

/// Short scientific rendering of a value for error messages.
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace qsalab
