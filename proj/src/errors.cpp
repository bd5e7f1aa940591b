#include "lieclf/errors.hpp"

namespace lieclf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::KinkEvaluation: return "KinkEvaluation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::EmptyPieceSet: return "EmptyPieceSet";
    case ErrorKind::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::NonpositiveMargin: return "NonpositiveMargin";
    case ErrorKind::NoDescentDirection: return "NoDescentDirection";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorKind::NonMonotoneInput: return "NonMonotoneInput";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace lieclf
