#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eigtest {

enum class ErrorCode {
  InvalidInput,
  NumericalFailure,
  EmptyData,
  NotPSD,
  InvalidWindow,
  InvalidSelection,
  NotAProjector,
  UndefinedGap,
  Unsupported,
  BlockFormViolation,
  DegreesOfFreedomTooSmall,
  RankMismatch,
  TooFewObservations,
  InvalidDimension,
  ParseError,
  UsageError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::InvalidSelection: return "InvalidSelection";
    case ErrorCode::NotAProjector: return "NotAProjector";
    case ErrorCode::UndefinedGap: return "UndefinedGap";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::BlockFormViolation: return "BlockFormViolation";
    case ErrorCode::DegreesOfFreedomTooSmall: return "DegreesOfFreedomTooSmall";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// the CLI can map it onto an exit status and a greppable prefix.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace eigtest
