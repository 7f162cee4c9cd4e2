#pragma once

#include <stdexcept>
#include <string>

namespace amor {

/// Failure category; doubles as the CLI exit code.
enum class ErrorCategory : int {
  Usage = 1,
  Config = 2,
  Domain = 3,
  Numeric = 4,
  Data = 5,
  Io = 6,
  ValidationFailed = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorCategory::Domain, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

/// Input data unusable for the requested estimate (too short, no crossing, ...).
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

}  // namespace amor
