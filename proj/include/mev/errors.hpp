#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mev {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Too few usable points for the requested estimator or statistic.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data geometry makes the estimator undefined (e.g. all abscissae equal).
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a data-model invariant (dates, amounts, config).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}
  [[nodiscard]] std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class DuplicateDate : public ParseError {
 public:
  using ParseError::ParseError;
};

class NegativeAmount : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyInterval : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonFiniteValue : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mev
