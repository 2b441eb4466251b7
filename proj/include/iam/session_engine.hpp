#pragma once

// Two-level authentication state machine.
//
//   S-1 (0,0) --login ok--> S-2 (1,0) --step-up ok--> S-3 (1,1)
//
// Level one accepts a PIN from any device or a fingerprint from a handheld
// device. A transaction on a service whose resolved sensitivity is A2 needs
// a face match against the cloud template before it executes; under the
// single_transaction scope the session drops back to S-2 right after that
// transaction. Logout and timeout go to S-1 from either online status.
//
// Every transition is committed to the knowledge base together with its
// user-log entry, so the log never lags the in-memory state.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "iam/authenticators.hpp"
#include "iam/clock.hpp"
#include "iam/domain.hpp"
#include "iam/knowledge_base.hpp"
#include "iam/random.hpp"

namespace iam {

struct EngineConfig {
  std::int64_t session_ttl_seconds = 600;
  std::int64_t challenge_ttl_seconds = 120;
  int max_a1_failures = 3;
  int max_a2_failures = 3;
  SensitiveModeScope sensitive_mode_scope = SensitiveModeScope::kSingleTransaction;
  double fingerprint_threshold = kDefaultFingerprintThreshold;
  double face_threshold = kDefaultFaceThreshold;
  PinDigest pin_digest = PinDigest::kSha256;

  // kInvalidArgument for non-positive TTLs or caps, thresholds outside [0, 1].
  void validate() const;
};

struct LoginRequest {
  std::string user_id;
  A1Method method = A1Method::kPin;
  std::optional<std::string> pin;
  std::optional<BiometricTemplate> fingerprint_probe;
  std::optional<std::string> device_id;
  DeviceType device_type = DeviceType::kDesktop;
  Geolocation geolocation;
};

struct Denied {
  enum class Reason {
    kBadCredential,  // counted; more attempts left
    kLockedOut,      // this failure locked the user
    kRefused,        // step-up attempts exhausted; transaction refused
  };
  Reason reason = Reason::kBadCredential;
  int attempts_remaining = 0;
};

struct StepUpChallenge {
  ChallengeToken challenge;
  AuthMethod required_method = AuthMethod::kFace;
  std::string service_id;
};

struct Executed {
  TransactionRecord transaction;
  SessionStatus status_after = SessionStatus::online();
};

using LoginResult = std::variant<Session, Denied>;
using InitiateResult = std::variant<Executed, StepUpChallenge>;
using StepUpResult = std::variant<Executed, Denied>;

class SessionEngine {
 public:
  SessionEngine(KnowledgeBase& kb, const Clock& clock, RandomSource& ids, EngineConfig config = {});

  SessionEngine(const SessionEngine&) = delete;
  SessionEngine& operator=(const SessionEngine&) = delete;

  // Errors: kUnknownUser, kUserLocked, kDeviceMethodViolation (fingerprint
  // from desktop/laptop), kUnknownDevice (no fingerprint binding for the
  // named device), kInvalidArgument (missing PIN / probe / device id).
  LoginResult login(const LoginRequest& request);

  // Errors: kNotAuthenticated (no such session), kSessionExpired,
  // kUnknownService, kChallengePending.
  InitiateResult initiate_transaction(const std::string& session_id, const std::string& service_id,
                                      std::optional<Amount> amount = std::nullopt);

  // Errors: kNotAuthenticated, kSessionExpired, kChallengeMismatch,
  // kChallengeConsumed, kChallengeExpired, kKindMismatch.
  StepUpResult complete_step_up(const std::string& session_id, const std::string& challenge_token,
                                const BiometricTemplate& face_probe);

  // kUnknownSession once the session is offline; kSessionExpired when its
  // TTL had already run out (the timeout is recorded first).
  void logout(const std::string& session_id);

  // Sessions whose expires_at < now go offline with a timeout entry.
  std::size_t sweep_expired(Instant now);

  // Raises the user's view of a service to A2. There is deliberately no
  // inverse. Errors: kUnknownUser, kUserLocked, kUnknownService, kAlreadyA2.
  ServiceDefinition upgrade_service_sensitivity(const std::string& user_id,
                                                const std::string& service_id);
  // Same, attributed to a live session (device and location come from it).
  ServiceDefinition upgrade_service_for_session(const std::string& session_id,
                                                const std::string& service_id);

  // Administrative unlock; clears the consecutive-failure counter.
  void unlock_user(const std::string& user_id);

  std::optional<Session> find_session(const std::string& session_id) const;
  // Snapshot of a live session. kNotAuthenticated for an unknown id,
  // kSessionExpired (recording the timeout) once offline or past its TTL.
  Session require_session(const std::string& session_id);
  const EngineConfig& config() const { return config_; }

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
    bool closed = false;
    int a2_failures = 0;
    std::optional<Amount> pending_amount;
    // Tokens this session has retired: true = consumed, false = lapsed.
    std::map<std::string, bool> retired_tokens;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  // Caller holds slot.mutex. Throws kSessionExpired when closed or past TTL.
  void require_live(Slot& slot, Instant now);
  void expire(Slot& slot, Instant now);
  UserLogEntry entry_for(const Session& s, LogEvent event, AuthMethod method, Instant at,
                         std::string detail = {}) const;
  Executed execute(Slot& slot, const std::string& service_id, std::optional<Amount> amount,
                   Sensitivity level, Instant now, KbBatch batch, bool stepped_up);

  KnowledgeBase& kb_;
  const Clock& clock_;
  RandomSource& ids_;
  EngineConfig config_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;

  std::mutex login_mutex_;
  std::map<std::string, int> a1_failures_;
};

}  // namespace iam
