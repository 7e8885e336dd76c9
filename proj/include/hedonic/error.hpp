#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hedonic {

enum class ErrorCode {
  NegativeWeight,
  WeightSumMismatch,
  DuplicatePoint,
  DimensionMismatch,
  EmptyMeasure,
  BadAxes,
  InvalidMass,
  DuplicateEntry,
  IndexOutOfRange,
  MarginalMismatch,
  EvalDomainError,
  OutOfGrid,
  ShapeMismatch,
  EmptyGrid,
  InfeasibleMarginals,
  TooLarge,
  NotEqualWeight,
  SizeMismatch,
  MissingUV,
  DegenerateCross,
  InfeasibleV,
  NotSeparable,
  TooFewPoints,
  IterationLimit,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::WeightSumMismatch: return "WeightSumMismatch";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::BadAxes: return "BadAxes";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::EvalDomainError: return "EvalDomainError";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotEqualWeight: return "NotEqualWeight";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MissingUV: return "MissingUV";
    case ErrorCode::DegenerateCross: return "DegenerateCross";
    case ErrorCode::InfeasibleV: return "InfeasibleV";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hedonic
