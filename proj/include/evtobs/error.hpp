#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evtobs {

enum class ErrorCode {
  NotSymmetric,
  NonzeroDiagonal,
  Disconnected,
  NotPositiveDefinite,
  SchurFailure,
  JointUndetectable,
  Unplaceable,
  BadPoleSet,
  NotHurwitz,
  BadEpsilon,
  NonpositiveCoefficient,
  RhoNonPositive,
  NonFinite,
  ConfigInvalid,
  ParseError,
  ValidationError,
  DimensionMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SchurFailure: return "SchurFailure";
    case ErrorCode::JointUndetectable: return "JointUndetectable";
    case ErrorCode::Unplaceable: return "Unplaceable";
    case ErrorCode::BadPoleSet: return "BadPoleSet";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::NonpositiveCoefficient: return "NonpositiveCoefficient";
    case ErrorCode::RhoNonPositive: return "RhoNonPositive";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  }
  return "Unknown";
}

}  // namespace evtobs
