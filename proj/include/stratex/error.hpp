#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stratex {

enum class ErrorKind {
  InvalidPrimitive,
  AssumptionViolated,
  ConvergenceFailure,
  NoSignChange,
  MaxIterations,
  StepUnderflow,
  AtBreakpoint,
  PartitionInvalid,
  PreconditionViolated,
  GridTooCoarse,
  InsufficientSamples,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPrimitive: return "InvalidPrimitive";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::AtBreakpoint: return "AtBreakpoint";
    case ErrorKind::PartitionInvalid: return "PartitionInvalid";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stratex
