#include "vacdec/error.hpp"

namespace vacdec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonUnitDirection: return "NonUnitDirection";
    case ErrorKind::NegativeDistance: return "NegativeDistance";
    case ErrorKind::MissingCoupling: return "MissingCoupling";
    case ErrorKind::InconsistentTrajectory: return "InconsistentTrajectory";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::CutoffRequired: return "CutoffRequired";
    case ErrorKind::InsufficientSpan: return "InsufficientSpan";
    case ErrorKind::UnsupportedCase: return "UnsupportedCase";
    case ErrorKind::McVarianceBlowup: return "McVarianceBlowup";
    case ErrorKind::UnknownCase: return "UnknownCase";
    case ErrorKind::NonMonotoneEnvelope: return "NonMonotoneEnvelope";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::QuadratureFailure:
    case ErrorKind::CutoffRequired:
    case ErrorKind::InsufficientSpan:
    case ErrorKind::UnsupportedCase:
    case ErrorKind::McVarianceBlowup:
    case ErrorKind::UnknownCase:
    case ErrorKind::NonMonotoneEnvelope:
      return true;
    default:
      return false;
  }
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
  std::string out = "invalid scenario:";
  for (const auto& v : violations) {
    out += " [";
    out += to_string(v.kind);
    out += " at ";
    out += v.field;
    out += ": ";
    out += v.message;
    out += "]";
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorKind::InvalidValue : violations.front().kind,
            summarize(violations)),
      violations_(std::move(violations)) {}

}  // namespace vacdec
