// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace regnas {

/// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  kConfig = 2,      ///< malformed input, invalid configuration, usage errors
  kInfeasible = 3,  ///< no feasible architecture under the constraint
  kEvaluator = 4,   ///< evaluator miss or dataset size mismatch
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

class EvaluatorError : public Error {
 public:
  explicit EvaluatorError(const std::string& what)
      : Error(ErrorKind::kEvaluator, what) {}
};

}  // namespace regnas
