#pragma once

#include <string>

#include "iam/error.hpp"

namespace iam {

struct ApiError {
  std::string code;  // stable, e.g. "DEVICE_METHOD_VIOLATION"
  int http_status = 500;
  std::string message;
};

// Total over ErrorCode:
//   401  NOT_AUTHENTICATED, SESSION_EXPIRED, UNKNOWN_SESSION
//   403  DEVICE_METHOD_VIOLATION, USER_LOCKED, PARTITION_VIOLATION
//   404  UNKNOWN_USER, UNKNOWN_DEVICE, UNKNOWN_SERVICE, NOT_FOUND
//   409  CHALLENGE_PENDING, CHALLENGE_EXPIRED, CHALLENGE_CONSUMED,
//        CHALLENGE_MISMATCH, ALREADY_A2, MONOTONICITY_VIOLATION, DUPLICATE_USER
//   422  MALFORMED_PIN, INVALID_NOISE_RATE, INVALID_THRESHOLD,
//        INVALID_ARGUMENT, KIND_MISMATCH, LENGTH_MISMATCH, MALFORMED_RECORD
//   500  INVALID_FLAG_PAIR, INTEGRITY_VIOLATION, STORAGE_FAILURE
int http_status_for(ErrorCode code);

// Messages are fixed per code so nothing from the request (PINs, template
// bits, digests) can be echoed back.
ApiError to_api_error(ErrorCode code);

}  // namespace iam
