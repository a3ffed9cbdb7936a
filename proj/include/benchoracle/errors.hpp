#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benchoracle {

// Every failure raised by the library derives from Error; the category maps
// onto the CLI exit code.
enum class ErrorCategory {
  validation,
  parse,
  policy,
  io,
  divergence,
  measurement,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class CorruptionError : public IoError {
 public:
  explicit CorruptionError(const std::string& what) : IoError(what) {}
};

class CsvError : public Error {
 public:
  // row/column are 1-based file coordinates; 0 means "not applicable".
  CsvError(const std::string& what, std::size_t row, std::size_t column)
      : Error(ErrorCategory::parse, what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : Error(ErrorCategory::divergence, what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class MeasurementError : public Error {
 public:
  explicit MeasurementError(const std::string& what)
      : Error(ErrorCategory::measurement, what) {}
};

class PolicyError : public Error {
 public:
  explicit PolicyError(const std::string& what)
      : Error(ErrorCategory::policy, what) {}
};

}  // namespace benchoracle
