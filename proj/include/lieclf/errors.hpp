#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lieclf {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  Parse,
  KinkEvaluation,
  NonFinite,
  EmptyPieceSet,
  DegreeOutOfRange,
  EmptySample,
  NonpositiveMargin,
  NoDescentDirection,
  StepFailure,
  MaxStepsExceeded,
  NonMonotoneInput,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` is the
/// machine-readable classification, `what()` carries the human text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lieclf
