#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vacdec {

enum class ErrorKind {
  // input / validation
  NonUnitDirection,
  NegativeDistance,
  MissingCoupling,
  InconsistentTrajectory,
  MissingField,
  InvalidValue,
  ParseError,
  UnknownKey,
  DuplicateKey,
  // numerics
  QuadratureFailure,
  CutoffRequired,
  InsufficientSpan,
  UnsupportedCase,
  McVarianceBlowup,
  UnknownCase,
  NonMonotoneEnvelope,
};

std::string_view to_string(ErrorKind kind);

/// True for failures of the numerical machinery (as opposed to bad input).
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Violation {
  ErrorKind kind;
  std::string field;  // dotted "section.key" name of the offending input
  std::string message;
};

/// Aggregates every violation found while validating a scenario.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace vacdec
