#include "iam/api_error.hpp"

namespace iam {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAuthenticated:
    case ErrorCode::kSessionExpired:
    case ErrorCode::kUnknownSession:
      return 401;
    case ErrorCode::kDeviceMethodViolation:
    case ErrorCode::kUserLocked:
    case ErrorCode::kPartitionViolation:
      return 403;
    case ErrorCode::kUnknownUser:
    case ErrorCode::kUnknownDevice:
    case ErrorCode::kUnknownService:
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kChallengePending:
    case ErrorCode::kChallengeExpired:
    case ErrorCode::kChallengeConsumed:
    case ErrorCode::kChallengeMismatch:
    case ErrorCode::kAlreadyA2:
    case ErrorCode::kMonotonicityViolation:
    case ErrorCode::kDuplicateUser:
      return 409;
    case ErrorCode::kMalformedPin:
    case ErrorCode::kInvalidNoiseRate:
    case ErrorCode::kInvalidThreshold:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kKindMismatch:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kMalformedRecord:
      return 422;
    case ErrorCode::kInvalidFlagPair:
    case ErrorCode::kIntegrityViolation:
    case ErrorCode::kStorageFailure:
      return 500;
  }
  return 500;
}

namespace {

const char* message_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAuthenticated: return "Sign in first.";
    case ErrorCode::kSessionExpired: return "Your session has ended. Sign in again.";
    case ErrorCode::kUnknownSession: return "No such session.";
    case ErrorCode::kDeviceMethodViolation: return "Fingerprint sign-in is only available on phones and tablets.";
    case ErrorCode::kUserLocked: return "This account is locked. Contact the bank to unlock it.";
    case ErrorCode::kPartitionViolation: return "Template storage location not permitted.";
    case ErrorCode::kUnknownUser: return "Unknown user.";
    case ErrorCode::kUnknownDevice: return "No fingerprint is enrolled on this device.";
    case ErrorCode::kUnknownService: return "Unknown service.";
    case ErrorCode::kNotFound: return "Not found.";
    case ErrorCode::kChallengePending: return "A second-level verification is already pending.";
    case ErrorCode::kChallengeExpired: return "The verification request has expired.";
    case ErrorCode::kChallengeConsumed: return "The verification request has already been used.";
    case ErrorCode::kChallengeMismatch: return "The verification request does not belong to this session.";
    case ErrorCode::kAlreadyA2: return "The service already requires second-level verification.";
    case ErrorCode::kMonotonicityViolation: return "A service cannot be downgraded to first-level access.";
    case ErrorCode::kDuplicateUser: return "User already enrolled.";
    case ErrorCode::kMalformedPin: return "The PIN must be 4 to 8 digits.";
    case ErrorCode::kInvalidNoiseRate: return "Noise rate must lie in [0, 0.5].";
    case ErrorCode::kInvalidThreshold: return "Threshold must lie in [0, 1].";
    case ErrorCode::kInvalidArgument: return "Malformed request.";
    case ErrorCode::kKindMismatch: return "Wrong biometric kind.";
    case ErrorCode::kLengthMismatch: return "Biometric template has the wrong length.";
    case ErrorCode::kMalformedRecord: return "Malformed value.";
    case ErrorCode::kInvalidFlagPair: return "Internal error.";
    case ErrorCode::kIntegrityViolation: return "Internal error.";
    case ErrorCode::kStorageFailure: return "Internal error.";
  }
  return "Internal error.";
}

}  // namespace

ApiError to_api_error(ErrorCode code) {
  return ApiError{std::string(error_code_name(code)), http_status_for(code), message_for(code)};
}

}  // namespace iam
