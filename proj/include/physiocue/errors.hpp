#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace physiocue {

// Base of every error thrown by the library. Callers that only care about
// "analysis failed" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad lengths, rates, parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The signal carries no usable information (zero variance, singular
// covariance, zero-mean channel). Callers decide the fallback.
class DegenerateSignal : public Error {
 public:
  using Error::Error;
};

// Not enough evidence to produce an estimate (too few edges, no edges).
class InsufficientEvidence : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `row` is the 1-based data row (0 when the error is
// in the header or the file as a whole), `column` is the column name.
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t row, std::string column, const std::string& what)
      : Error(format(path, row, column, what)), path_(std::move(path)), row_(row),
        column_(std::move(column)) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& path, std::size_t row, const std::string& column,
                            const std::string& what) {
    std::string msg = path;
    if (row > 0) msg += ":row " + std::to_string(row);
    if (!column.empty()) msg += ":column '" + column + "'";
    return msg + ": " + what;
  }

  std::string path_;
  std::size_t row_;
  std::string column_;
};

// Bad configuration file or flag value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace physiocue
