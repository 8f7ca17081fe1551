#pragma once

#include <stdexcept>
#include <string>

namespace retweet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed TSV lines, unparseable fields, out-of-range values.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  FormatError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FieldError : public DataError {
 public:
  FieldError(std::string column, std::string detail, std::size_t line = 0)
      : DataError((line ? "line " + std::to_string(line) + ": " : std::string()) + "column '" +
                  column + "': " + detail),
        column_(std::move(column)),
        detail_(std::move(detail)) {}
  const std::string& column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string column_;
  std::string detail_;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// Tensor shapes that do not conform to an operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class PoolingError : public Error {
 public:
  using Error::Error;
};

class FoldError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by a forward or backward pass.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class OptimizerError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace retweet
