#pragma once

#include <stdexcept>
#include <string>

namespace specstat {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// A caller-supplied argument violates an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

/// A model specification cannot be turned into a partition function.
class ModelError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "model_error"; }
};

/// A size cap (expansion support, oracle state count, table size) was hit.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "budget_exceeded"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

/// Some factor Z_k vanishes at the requested evaluation point.
class PoleError : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "pole"; }
};

/// Continuous-branch tracking of a complex logarithm failed.
class BranchError : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "branch"; }
};

class ZeroVarianceError : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "zero_variance"; }
};

class OverflowError : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "overflow"; }
};

}  // namespace specstat
