#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracepi {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The stepping recurrence produced a non-finite state.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t node)
      : Error("non-finite state at node " + std::to_string(node)), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Series evaluation left its convergent range.
class OracleRangeError : public Error {
 public:
  using Error::Error;
};

class NoEndemicEquilibrium : public Error {
 public:
  explicit NoEndemicEquilibrium(double r0)
      : Error("no endemic equilibrium: R0 = " + std::to_string(r0) + " <= 1"), r0_(r0) {}
  double r0() const noexcept { return r0_; }

 private:
  double r0_;
};

/// Two sampled objects do not share the same time grid or length.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Case-series ingestion errors. Row numbers are 1-based file lines.
class DataError : public Error {
 public:
  using Error::Error;
};

class MissingFile : public DataError {
 public:
  explicit MissingFile(const std::string& path) : DataError("cannot open file: " + path) {}
};

class MalformedRow : public DataError {
 public:
  MalformedRow(std::size_t line, const std::string& what)
      : DataError("malformed row at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NegativeCount : public DataError {
 public:
  explicit NegativeCount(std::size_t line)
      : DataError("negative case count at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TooFewRows : public DataError {
 public:
  explicit TooFewRows(std::size_t rows)
      : DataError("case series needs at least 2 rows, got " + std::to_string(rows)) {}
};

/// Every probe of the order search diverged.
class FitFailure : public Error {
 public:
  using Error::Error;
};

/// The forward-backward sweep failed inside an iteration.
class SweepError : public Error {
 public:
  SweepError(std::size_t iteration, const std::string& what)
      : Error("sweep failed at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class UndefinedRatio : public Error {
 public:
  using Error::Error;
};

class RankingError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem; key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace fracepi
