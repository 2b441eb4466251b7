#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iam {

// Every failure the core can surface. The gateway maps each one to exactly
// one ApiError; see api_error.cpp for the table.
enum class ErrorCode {
  kInvalidFlagPair,
  kMalformedPin,
  kUserLocked,
  kUnknownUser,
  kUnknownDevice,
  kUnknownService,
  kUnknownSession,
  kDeviceMethodViolation,
  kInvalidNoiseRate,
  kInvalidThreshold,
  kInvalidArgument,
  kKindMismatch,
  kLengthMismatch,
  kSessionExpired,
  kNotAuthenticated,
  kChallengePending,
  kChallengeExpired,
  kChallengeConsumed,
  kChallengeMismatch,
  kAlreadyA2,
  kMonotonicityViolation,
  kPartitionViolation,
  kNotFound,
  kIntegrityViolation,
  kDuplicateUser,
  kMalformedRecord,
  kStorageFailure,
};

// Stable machine-readable name, e.g. "DEVICE_METHOD_VIOLATION".
std::string_view error_code_name(ErrorCode code);

class IamError : public std::runtime_error {
 public:
  IamError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iam
