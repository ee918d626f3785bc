#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calib {

// Base class for all library errors. Subclasses map onto the CLI exit codes:
// ConfigError -> 2, IngestError -> 3, everything else -> 4.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Vector cannot be normalized onto the simplex (all-zero, negative entries, ...).
class DegenerateVector : public Error {
public:
  using Error::Error;
};

// Class index outside [0, L).
class InvalidClass : public Error {
public:
  using Error::Error;
};

// An operation that needs at least one data point got none.
class EmptyData : public Error {
public:
  using Error::Error;
};

// Non-positive or otherwise unusable kernel bandwidth.
class InvalidBandwidth : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
  using Error::Error;
};

// Mismatched class counts between objects that must agree on L.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Invalid experiment or tool configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Unparseable or invalid input file; carries the 1-based data row number
// when one is known (0 means "not row specific").
class IngestError : public Error {
public:
  explicit IngestError(const std::string& msg, std::size_t row = 0)
    : Error(row > 0 ? msg + " (row " + std::to_string(row) + ")" : msg), row_(row) {}

  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

}  // namespace calib
