#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace liquid {

enum class ErrorCode {
  EmptyProfile,
  NegativeShare,
  NotNormalized,
  DimensionMismatch,
  DuplicateOwner,
  EmptySet,
  EpsilonOutOfRange,
  SolverFailure,
  NoConvergence,
  NotInClassB,
  SupportTooLarge,
  PreconditionViolated,
  DegenerateDenominator,
  EmptyNeighborhood,
  ParameterOutOfRange,
  GridTooLarge,
  UnknownSuite,
  InvalidInstance,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::NegativeShare: return "NegativeShare";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateOwner: return "DuplicateOwner";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotInClassB: return "NotInClassB";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::InvalidInstance: return "InvalidInstance";
  }
  return "Unknown";
}

/// Numerical failures map to a different CLI exit code than bad input.
constexpr bool is_numerical(ErrorCode code) {
  return code == ErrorCode::SolverFailure || code == ErrorCode::NoConvergence;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> agent = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        agent_(agent) {}

  ErrorCode code() const noexcept { return code_; }

  /// Zero-based index of the offending agent, when one is known.
  std::optional<std::size_t> agent() const noexcept { return agent_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> agent_;
};

}  // namespace liquid
