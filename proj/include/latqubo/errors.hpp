#pragma once

#include <stdexcept>
#include <string>

namespace latqubo {

/// Base class for every error raised by the library. `exit_code()` maps the
/// error family onto the CLI's exit status.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const noexcept { return 1; }
};

// ---- input / file errors (exit 4) -----------------------------------------

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

/// Bytes do not follow the expected container layout (e.g. bad NPY magic).
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Well-formed input that uses a feature the reader does not implement.
/// `field()` names the offending header field.
class UnsupportedFeatureError : public IoError {
 public:
  UnsupportedFeatureError(std::string field, const std::string& what)
      : IoError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class LengthMismatchError : public IoError {
 public:
  using IoError::IoError;
};

class MissingColumnError : public IoError {
 public:
  using IoError::IoError;
};

/// Unparseable cell; `row()` is the 1-based file line number.
class ParseError : public IoError {
 public:
  ParseError(std::size_t row, const std::string& what) : IoError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// ---- validation errors (exit 2) -------------------------------------------

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateStratificationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// ---- numeric errors (exit 3) ----------------------------------------------

class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class IllConditionedError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(double residual, const std::string& what)
      : NumericError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class UndefinedRankError : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---- pipeline ---------------------------------------------------------------

/// A pipeline stage failed; keeps the exit code of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause, int code)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)), code_(code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept override { return code_; }

 private:
  std::string stage_;
  int code_;
};

}  // namespace latqubo
