#include "bdsde/errors.hpp"

namespace bdsde {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateJumpSize: return "DuplicateJumpSize";
    case ErrorCode::ZeroJumpSize: return "ZeroJumpSize";
    case ErrorCode::NonpositiveIntensity: return "NonpositiveIntensity";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::InitialPointOutsideDomain: return "InitialPointOutsideDomain";
    case ErrorCode::NonMonotoneUserTable: return "NonMonotoneUserTable";
    case ErrorCode::SingularRegression: return "SingularRegression";
    case ErrorCode::TerminalBelowObstacle: return "TerminalBelowObstacle";
    case ErrorCode::CflViolation: return "CFLViolation";
    case ErrorCode::BisectionFailure: return "BisectionFailure";
    case ErrorCode::GridIncompatible: return "GridIncompatible";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::UnknownCoefficientName: return "UnknownCoefficientName";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace bdsde
