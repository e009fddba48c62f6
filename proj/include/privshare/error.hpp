// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace privshare {

enum class ErrorCode {
  kNonPmf,
  kNonPositiveEntry,
  kNonPositiveRate,
  kEqualProfiles,
  kDimensionMismatch,
  kOfferOutOfRange,
  kOfferExceedsMax,
  kNoConvergence,
  kDomain,
  kZeroDifference,
  kWrongArity,
  kWrongKind,
  kDegenerate,
  kNotConical,
  kNoCoveringCell,
  kParallel,
  kTiedSlopes,
  kInfeasible,
  kInvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPmf: return "NON_PMF";
    case ErrorCode::kNonPositiveEntry: return "NON_POSITIVE_ENTRY";
    case ErrorCode::kNonPositiveRate: return "NON_POSITIVE_RATE";
    case ErrorCode::kEqualProfiles: return "EQUAL_PROFILES";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kOfferOutOfRange: return "OFFER_OUT_OF_RANGE";
    case ErrorCode::kOfferExceedsMax: return "OFFER_EXCEEDS_MAX";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kDomain: return "DOMAIN";
    case ErrorCode::kZeroDifference: return "ZERO_DIFFERENCE";
    case ErrorCode::kWrongArity: return "WRONG_ARITY";
    case ErrorCode::kWrongKind: return "WRONG_KIND";
    case ErrorCode::kDegenerate: return "DEGENERATE";
    case ErrorCode::kNotConical: return "NOT_CONICAL";
    case ErrorCode::kNoCoveringCell: return "NO_COVERING_CELL";
    case ErrorCode::kParallel: return "PARALLEL";
    case ErrorCode::kTiedSlopes: return "TIED_SLOPES";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

/// Exception carrying a machine-readable code. Every failure raised by the
/// library is an Error; callers switch on code() rather than parsing what().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Raised when the dual root-finder runs out of iterations. Carries the best
/// residuals reached so callers can decide whether they are usable.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& message, double pmf_residual,
                double money_residual)
      : Error(ErrorCode::kNoConvergence, message),
        pmf_residual_(pmf_residual),
        money_residual_(money_residual) {}

  double pmf_residual() const noexcept { return pmf_residual_; }
  double money_residual() const noexcept { return money_residual_; }

 private:
  double pmf_residual_;
  double money_residual_;
};

}  // namespace privshare
