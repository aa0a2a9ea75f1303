#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdsde {

enum class ErrorCode {
  DuplicateJumpSize,
  ZeroJumpSize,
  NonpositiveIntensity,
  EmptyMeasure,
  RankMismatch,
  InitialPointOutsideDomain,
  NonMonotoneUserTable,
  SingularRegression,
  TerminalBelowObstacle,
  CflViolation,
  BisectionFailure,
  GridIncompatible,
  ConfigParseError,
  UnknownCoefficientName,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// and tests distinguish the failure without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bdsde
