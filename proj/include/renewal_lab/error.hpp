#pragma once

#include <stdexcept>
#include <string>

namespace renewal_lab {

enum class ErrorCode {
  NonPositiveBeta,
  TruncationTooCoarse,
  NotNormalized,
  PeriodicLaw,
  POutOfRange,
  CapacityExceeded,
  MissingTailIndex,
  HypothesisViolated,
  ZeroCoefficientInWindow,
  BetaOutOfRange,
  OutOfDomain,
  QOutOfRange,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::TruncationTooCoarse: return "TruncationTooCoarse";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::PeriodicLaw: return "PeriodicLaw";
    case ErrorCode::POutOfRange: return "POutOfRange";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::MissingTailIndex: return "MissingTailIndex";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ZeroCoefficientInWindow: return "ZeroCoefficientInWindow";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::POutOfRange, "p must lie in (0,1)");
}

}  // namespace renewal_lab
