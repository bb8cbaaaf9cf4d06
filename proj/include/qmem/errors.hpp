#ifndef QMEM_ERRORS_HPP
#define QMEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qmem {

/// Exit-code categories used by the CLI: 2 config, 3 numeric/convergence, 4 I/O.
enum class ErrorCategory : int { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

class InvalidDimensionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DimensionMismatchError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Raised when a requested operation would silently corrupt results by
/// exceeding the Fock-space truncation. Always a hard error, never a warning.
class TruncationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidStateError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonNormalizableError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateHeraldError : public NumericError {
 public:
  using NumericError::NumericError;
};

class TooFewPhasesError : public NumericError {
 public:
  using NumericError::NumericError;
};

class AmbiguousModeError : public NumericError {
 public:
  using NumericError::NumericError;
};

class GridMismatchError : public NumericError {
 public:
  using NumericError::NumericError;
};

class UndefinedLossError : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnreliableSubspaceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace qmem

#endif  // QMEM_ERRORS_HPP
