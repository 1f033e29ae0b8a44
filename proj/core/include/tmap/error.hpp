#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tmap {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameter (negative degree, non-positive scale, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (missing variable, non-finite input).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A diagonal derivative that must be positive was not.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

/// Root bracketing during inversion ran past the admissible range.
class InversionRangeError : public Error {
 public:
  InversionRangeError(const std::string& what, int component = -1)
      : Error(what), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int component = -1)
      : Error(what), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Data cannot be standardized (constant column, too few rows).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Normal equations are singular and no regularization was requested.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// One or more components of a map fit failed; carries (index, message) pairs.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<std::pair<int, std::string>> failures)
      : Error(what), failures_(std::move(failures)) {}
  const std::vector<std::pair<int, std::string>>& failures() const noexcept { return failures_; }

 private:
  std::vector<std::pair<int, std::string>> failures_;
};

/// A target log-density returned a non-finite value.
class TargetEvaluationError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not supported by this object.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Map file carries a schema version this build does not understand.
class SchemaVersionError : public Error {
 public:
  using Error::Error;
};

/// Input text (CSV, JSON) could not be parsed.
class MalformedInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmap
