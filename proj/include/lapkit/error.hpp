// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lapkit {

enum class ErrorKind {
  SingularShift,
  DimensionMismatch,
  InvalidSpec,
  ExhaustedCandidates,
  ResonantCoupling,
  NotRegularDirection,
  NotInKernel,
  PreconditionFailed,
  EndpointOnSpectrum,
  ConfigInvalid,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularShift: return "SingularShift";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ExhaustedCandidates: return "ExhaustedCandidates";
    case ErrorKind::ResonantCoupling: return "ResonantCoupling";
    case ErrorKind::NotRegularDirection: return "NotRegularDirection";
    case ErrorKind::NotInKernel: return "NotInKernel";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::EndpointOnSpectrum: return "EndpointOnSpectrum";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries one of the kinds above so
/// callers (and the report writer) can branch on it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lapkit
