#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ev2r {

enum class ErrorKind {
  InvalidArgument,
  UnknownLabel,
  LabelSpaceMismatch,
  Timeout,
  RateLimited,
  MalformedResponse,
  AuthMissing,
  LogprobsUnavailable,
  MissingReference,
  TooShort,
  NoNoiseCandidate,
  ZeroVariance,
  LengthMismatch,
  UnequalRaterCounts,
  DegenerateExpectedAgreement,
  InsufficientPairs,
  EmptyJoin,
  SchemaViolation,
  Io,
  Config,
  Transport,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string raw = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(message),
        raw_(std::move(raw)) {}

  ErrorKind kind() const noexcept { return kind_; }

  // what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

  // Raw backend text preserved for audit (MalformedResponse).
  const std::string& raw() const noexcept { return raw_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::string raw_;
};

}  // namespace ev2r
