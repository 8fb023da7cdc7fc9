#ifndef SMTJ_ERRORS_HPP
#define SMTJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smtj {

// Process exit codes used by the CLI. Library code throws the matching
// exception type; the CLI maps them at the top level.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitBreakdown = 3,
  kExitNumericalFailure = 4,
};

// Invalid or inconsistent configuration (files, specs, parameter ranges).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulated device was driven at or beyond its barrier-breakdown current.
class BreakdownError : public std::runtime_error {
 public:
  explicit BreakdownError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (singular systems, degenerate statistics, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Correlation of a constant (zero-variance) series.
class UndefinedCorrelationError : public NumericalError {
 public:
  explicit UndefinedCorrelationError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace smtj

#endif
