#pragma once

#include <stdexcept>
#include <string>

namespace tdisagg {

enum class ErrorCode {
  // input / structural
  IoError,
  MalformedHeader,
  NonNumericField,
  DuplicateKey,
  LengthMismatch,
  IncompleteFrame,
  MissingColumn,
  EmptyInput,
  AllXMissing,
  InsufficientObservations,
  DegenerateIndicator,
  NegativeTarget,
  InvalidArgument,
  // numerical
  RankDeficient,
  SingularV,
  SingularSystem,
  RhoOutOfRange,
  NoFiniteCandidate,
  NonPositiveVariance,
  EmptyMemberSet,
  AllMembersFailed,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonNumericField: return "NonNumericField";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IncompleteFrame: return "IncompleteFrame";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllXMissing: return "AllXMissing";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::DegenerateIndicator: return "DegenerateIndicator";
    case ErrorCode::NegativeTarget: return "NegativeTarget";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularV: return "SingularV";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::NoFiniteCandidate: return "NoFiniteCandidate";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::EmptyMemberSet: return "EmptyMemberSet";
    case ErrorCode::AllMembersFailed: return "AllMembersFailed";
  }
  return "UnknownError";
}

// Exit-code classification for the CLI: input problems exit 1, numerical
// failures exit 2.
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::SingularV:
    case ErrorCode::SingularSystem:
    case ErrorCode::RhoOutOfRange:
    case ErrorCode::NoFiniteCandidate:
    case ErrorCode::NonPositiveVariance:
    case ErrorCode::EmptyMemberSet:
    case ErrorCode::AllMembersFailed:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tdisagg
