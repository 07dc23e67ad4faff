#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csh {

enum class ErrorKind {
  RegimeMismatch,
  CompletenessViolation,
  TopologicalBetaMismatch,
  QuadratureFailure,
  SeedNotConverged,
  NotMonotone,
  CrossCheckFailure,
  WindowTooShort,
  OutOfDomain,
  PositivityBreach,
  BlowUp,
  TailNotConverged,
  BracketNotFound,
  SlopeBoundViolated,
  AlphaBelowThreshold,
  CoincidentPointsUnresolvable,
  SigmaTooLarge,
  LinearSolveFailure,
  SubsolutionUnreachable,
  OrderingViolation,
  MonotonicityBreach,
  ContinuationDiverged,
  NegativeDensity,
  FluxMismatch,
  TailNotIntegrable,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::RegimeMismatch: return "RegimeMismatch";
    case ErrorKind::CompletenessViolation: return "CompletenessViolation";
    case ErrorKind::TopologicalBetaMismatch: return "TopologicalBetaMismatch";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SeedNotConverged: return "SeedNotConverged";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::CrossCheckFailure: return "CrossCheckFailure";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::PositivityBreach: return "PositivityBreach";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::TailNotConverged: return "TailNotConverged";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::SlopeBoundViolated: return "SlopeBoundViolated";
    case ErrorKind::AlphaBelowThreshold: return "AlphaBelowThreshold";
    case ErrorKind::CoincidentPointsUnresolvable: return "CoincidentPointsUnresolvable";
    case ErrorKind::SigmaTooLarge: return "SigmaTooLarge";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::SubsolutionUnreachable: return "SubsolutionUnreachable";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::MonotonicityBreach: return "MonotonicityBreach";
    case ErrorKind::ContinuationDiverged: return "ContinuationDiverged";
    case ErrorKind::NegativeDensity: return "NegativeDensity";
    case ErrorKind::FluxMismatch: return "FluxMismatch";
    case ErrorKind::TailNotIntegrable: return "TailNotIntegrable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every solver failure is reported through this one exception type; callers
/// branch on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace csh
