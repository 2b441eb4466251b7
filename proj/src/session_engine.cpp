#include "iam/session_engine.hpp"

#include "iam/error.hpp"

namespace iam {

namespace {

constexpr std::size_t kSessionIdBytes = 16;
constexpr std::size_t kChallengeTokenBytes = 32;

std::string attempt_detail(int attempt, int cap) {
  return "attempt=" + std::to_string(attempt) + "/" + std::to_string(cap);
}

}  // namespace

void EngineConfig::validate() const {
  auto bad = [](const char* what) { throw IamError(ErrorCode::kInvalidArgument, what); };
  if (session_ttl_seconds <= 0) bad("session_ttl_seconds must be positive");
  if (challenge_ttl_seconds <= 0) bad("challenge_ttl_seconds must be positive");
  if (max_a1_failures <= 0) bad("max_a1_failures must be positive");
  if (max_a2_failures <= 0) bad("max_a2_failures must be positive");
  if (!(fingerprint_threshold >= 0.0 && fingerprint_threshold <= 1.0)) bad("fingerprint threshold outside [0, 1]");
  if (!(face_threshold >= 0.0 && face_threshold <= 1.0)) bad("face threshold outside [0, 1]");
}

SessionEngine::SessionEngine(KnowledgeBase& kb, const Clock& clock, RandomSource& ids,
                             EngineConfig config)
    : kb_(kb), clock_(clock), ids_(ids), config_(config) {
  config_.validate();
}

UserLogEntry SessionEngine::entry_for(const Session& s, LogEvent event, AuthMethod method,
                                      Instant at, std::string detail) const {
  UserLogEntry e;
  e.session_id = s.session_id;
  e.user_id = s.user_id;
  e.event = event;
  e.device_type = s.device_type;
  e.geolocation = s.geolocation;
  e.auth_method_used = method;
  e.timestamp = at;
  e.detail = std::move(detail);
  return e;
}

std::shared_ptr<SessionEngine::Slot> SessionEngine::slot(const std::string& session_id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw IamError(ErrorCode::kNotAuthenticated, "no session " + session_id);
  }
  return it->second;
}

void SessionEngine::expire(Slot& slot, Instant now) {
  KbBatch batch;
  batch.add(entry_for(slot.session, LogEvent::kTimeout, AuthMethod::kNone, now));
  kb_.commit(batch);
  slot.session.status = SessionStatus::offline();
  slot.session.a1_timestamp.reset();
  slot.session.a2_timestamp.reset();
  slot.session.pending_challenge.reset();
  slot.closed = true;
}

void SessionEngine::require_live(Slot& slot, Instant now) {
  if (slot.closed) throw IamError(ErrorCode::kSessionExpired, "session is offline");
  if (slot.session.expires_at < now) {
    expire(slot, now);
    throw IamError(ErrorCode::kSessionExpired, "session expired");
  }
}

// ---------------------------------------------------------------------------

LoginResult SessionEngine::login(const LoginRequest& request) {
  std::lock_guard lock(login_mutex_);
  const Instant now = clock_.now();

  auto user = kb_.find_user(request.user_id);
  if (!user) throw IamError(ErrorCode::kUnknownUser, "unknown user " + request.user_id);
  if (user->status == UserStatus::kLocked) {
    throw IamError(ErrorCode::kUserLocked, "user " + request.user_id + " is locked");
  }

  bool verified = false;
  switch (request.method) {
    case A1Method::kPin:
      if (!request.pin) throw IamError(ErrorCode::kInvalidArgument, "PIN login without a PIN");
      verified = verify_pin(*request.pin, *user, config_.pin_digest);
      break;
    case A1Method::kFingerprint: {
      if (!supports_fingerprint(request.device_type)) {
        throw IamError(ErrorCode::kDeviceMethodViolation,
                       std::string(to_string(request.device_type)) + " users authenticate by PIN");
      }
      if (!request.device_id) {
        throw IamError(ErrorCode::kInvalidArgument, "fingerprint login without a device id");
      }
      if (!request.fingerprint_probe) {
        throw IamError(ErrorCode::kInvalidArgument, "fingerprint login without a probe");
      }
      const DeviceBinding* binding = user->find_device(*request.device_id);
      if (!binding || !binding->fingerprint_template_ref) {
        throw IamError(ErrorCode::kUnknownDevice,
                       "no fingerprint enrolled on device " + *request.device_id);
      }
      const auto enrolled = kb_.fetch_template(*binding->fingerprint_template_ref,
                                               StoreLocation::device(binding->device_id));
      verified =
          match_templates(*request.fingerprint_probe, enrolled, config_.fingerprint_threshold).matched;
      break;
    }
    case A1Method::kNone:
      throw IamError(ErrorCode::kInvalidArgument, "login method must be pin or fingerprint");
  }

  Session s;
  s.user_id = request.user_id;
  s.device_type = request.device_type;
  s.geolocation = request.geolocation;
  const AuthMethod method = to_auth_method(request.method);

  if (!verified) {
    const int failures = ++a1_failures_[request.user_id];
    KbBatch batch;
    batch.add(entry_for(s, LogEvent::kA1Denied, method, now,
                        attempt_detail(failures, config_.max_a1_failures)));
    const bool lock_now = failures >= config_.max_a1_failures;
    if (lock_now) {
      batch.add(SetUserStatus{request.user_id, UserStatus::kLocked});
      batch.add(entry_for(s, LogEvent::kLockout, AuthMethod::kNone, now));
    }
    kb_.commit(batch);
    if (lock_now) a1_failures_.erase(request.user_id);
    return Denied{lock_now ? Denied::Reason::kLockedOut : Denied::Reason::kBadCredential,
                  lock_now ? 0 : config_.max_a1_failures - failures};
  }

  s.session_id = "s-" + ids_.hex(kSessionIdBytes);
  s.status = SessionStatus::online();
  s.a1_method = request.method;
  s.a1_timestamp = now;
  s.created_at = now;
  s.expires_at = now + std::chrono::seconds{config_.session_ttl_seconds};

  KbBatch batch;
  batch.add(entry_for(s, LogEvent::kA1Granted, method, now));
  kb_.commit(batch);
  a1_failures_.erase(request.user_id);

  auto fresh = std::make_shared<Slot>();
  fresh->session = s;
  std::lock_guard sessions_lock(sessions_mutex_);
  sessions_[s.session_id] = std::move(fresh);
  return s;
}

// ---------------------------------------------------------------------------

Executed SessionEngine::execute(Slot& slot, const std::string& service_id,
                                std::optional<Amount> amount, Sensitivity level, Instant now,
                                KbBatch batch, bool stepped_up) {
  TransactionRecord tx;
  tx.transaction_id = kb_.next_transaction_id();
  tx.session_id = slot.session.session_id;
  tx.user_id = slot.session.user_id;
  tx.service_id = service_id;
  tx.amount = amount;
  tx.executed_at = now;
  tx.required_level = level;

  SessionStatus after = slot.session.status;
  std::string detail = "transaction_id=" + tx.transaction_id + ";service_id=" + service_id +
                       ";level=" + std::string(to_string(level));
  if (stepped_up) {
    after = config_.sensitive_mode_scope == SensitiveModeScope::kSingleTransaction
                ? SessionStatus::online()
                : SessionStatus::sensitive();
    detail += ";status_after=" + std::string(status_code(after.label()));
  }

  batch.add(tx);
  batch.add(entry_for(slot.session, LogEvent::kTxExecuted,
                      level == Sensitivity::kA2 ? AuthMethod::kFace : to_auth_method(slot.session.a1_method),
                      now, detail));
  kb_.commit(batch);

  if (stepped_up) {
    slot.session.status = after;
    if (after.a2()) {
      slot.session.a2_timestamp = now;
    } else {
      slot.session.a2_timestamp.reset();
    }
  }
  return Executed{tx, slot.session.status};
}

InitiateResult SessionEngine::initiate_transaction(const std::string& session_id,
                                                   const std::string& service_id,
                                                   std::optional<Amount> amount) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  const Instant now = clock_.now();
  require_live(*s, now);
  if (!s->session.status.a1()) throw IamError(ErrorCode::kNotAuthenticated, "session is offline");

  const Sensitivity level = kb_.resolve_sensitivity(s->session.user_id, service_id);
  if (level == Sensitivity::kA1) {
    return execute(*s, service_id, amount, level, now, {}, false);
  }
  if (s->session.status.a2()) {
    // Sensitive mode persists for the session (session scope only).
    return execute(*s, service_id, amount, level, now, {}, false);
  }

  auto& pending = s->session.pending_challenge;
  if (pending && !pending->consumed) {
    if (!pending->expired_at(now)) {
      throw IamError(ErrorCode::kChallengePending, "a step-up challenge is already pending");
    }
    s->retired_tokens[pending->token] = false;
  }

  ChallengeToken token;
  token.token = ids_.hex(kChallengeTokenBytes);
  token.service_id = service_id;
  token.issued_at = now;
  token.ttl_seconds = config_.challenge_ttl_seconds;
  pending = token;
  s->pending_amount = amount;
  s->a2_failures = 0;
  return StepUpChallenge{token, AuthMethod::kFace, service_id};
}

StepUpResult SessionEngine::complete_step_up(const std::string& session_id,
                                             const std::string& challenge_token,
                                             const BiometricTemplate& face_probe) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  const Instant now = clock_.now();
  require_live(*s, now);

  auto& pending = s->session.pending_challenge;
  if (!pending || pending->token != challenge_token) {
    auto it = s->retired_tokens.find(challenge_token);
    if (it == s->retired_tokens.end()) {
      throw IamError(ErrorCode::kChallengeMismatch, "challenge is not bound to this session");
    }
    if (it->second) throw IamError(ErrorCode::kChallengeConsumed, "challenge already used");
    throw IamError(ErrorCode::kChallengeExpired, "challenge expired");
  }
  if (pending->expired_at(now)) {
    s->retired_tokens[pending->token] = false;
    pending.reset();
    throw IamError(ErrorCode::kChallengeExpired, "challenge expired");
  }

  const UserRecord user = kb_.get_user(s->session.user_id);
  const auto enrolled = kb_.fetch_template(user.face_template_ref, StoreLocation::cloud());
  const MatchResult match = match_templates(face_probe, enrolled, config_.face_threshold);
  const std::string service_id = pending->service_id;

  if (!match.matched) {
    const int failures = ++s->a2_failures;
    KbBatch batch;
    batch.add(entry_for(s->session, LogEvent::kA2Denied, AuthMethod::kFace, now,
                        attempt_detail(failures, config_.max_a2_failures)));
    const bool refuse = failures >= config_.max_a2_failures;
    if (refuse) {
      batch.add(entry_for(s->session, LogEvent::kTxRefused, AuthMethod::kNone, now,
                          "service_id=" + service_id + ";reason=a2_attempts_exhausted"));
    }
    kb_.commit(batch);
    if (refuse) {
      s->retired_tokens[pending->token] = true;
      pending.reset();
      s->pending_amount.reset();
      s->a2_failures = 0;
    }
    return Denied{refuse ? Denied::Reason::kRefused : Denied::Reason::kBadCredential,
                  refuse ? 0 : config_.max_a2_failures - failures};
  }

  // S-2 -> S-3, then the bound transaction runs in sensitive mode.
  s->session.status = SessionStatus::sensitive();
  s->session.a2_timestamp = now;
  KbBatch batch;
  batch.add(entry_for(s->session, LogEvent::kA2Granted, AuthMethod::kFace, now,
                      "service_id=" + service_id));
  Executed done;
  try {
    done = execute(*s, service_id, s->pending_amount, Sensitivity::kA2, now, std::move(batch), true);
  } catch (...) {
    s->session.status = SessionStatus::online();
    s->session.a2_timestamp.reset();
    throw;
  }
  s->retired_tokens[pending->token] = true;
  pending.reset();
  s->pending_amount.reset();
  s->a2_failures = 0;
  return done;
}

// ---------------------------------------------------------------------------

void SessionEngine::logout(const std::string& session_id) {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw IamError(ErrorCode::kUnknownSession, "no session " + session_id);
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  if (s->closed) throw IamError(ErrorCode::kUnknownSession, "session already offline");
  const Instant now = clock_.now();
  require_live(*s, now);

  KbBatch batch;
  batch.add(entry_for(s->session, LogEvent::kLogout, AuthMethod::kNone, now));
  kb_.commit(batch);
  s->session.status = SessionStatus::offline();
  s->session.a1_timestamp.reset();
  s->session.a2_timestamp.reset();
  s->session.pending_challenge.reset();
  s->closed = true;
}

std::size_t SessionEngine::sweep_expired(Instant now) {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(sessions_mutex_);
    // Offline sessions are kept for one extra TTL so late requests still
    // see SESSION_EXPIRED rather than NOT_AUTHENTICATED.
    const auto grace = std::chrono::seconds{config_.session_ttl_seconds};
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      std::unique_lock slot_lock(it->second->mutex, std::try_to_lock);
      if (slot_lock.owns_lock() && it->second->closed && it->second->session.expires_at + grace < now) {
        slot_lock.unlock();
        it = sessions_.erase(it);
        continue;
      }
      slots.push_back(it->second);
      ++it;
    }
  }
  std::size_t expired = 0;
  for (auto& s : slots) {
    std::lock_guard lock(s->mutex);
    if (!s->closed && s->session.expires_at < now) {
      expire(*s, now);
      ++expired;
    }
  }
  return expired;
}

ServiceDefinition SessionEngine::upgrade_service_sensitivity(const std::string& user_id,
                                                             const std::string& service_id) {
  const UserRecord user = kb_.get_user(user_id);
  if (user.status == UserStatus::kLocked) throw IamError(ErrorCode::kUserLocked, "user is locked");
  const Instant now = clock_.now();
  Session context;
  context.user_id = user_id;
  KbBatch batch;
  batch.add(ServiceUpgrade{user_id, service_id, now});
  batch.add(entry_for(context, LogEvent::kServiceUpgraded, AuthMethod::kNone, now,
                      "service_id=" + service_id));
  kb_.commit(batch);
  return kb_.service_for(user_id, service_id);
}

ServiceDefinition SessionEngine::upgrade_service_for_session(const std::string& session_id,
                                                             const std::string& service_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  const Instant now = clock_.now();
  require_live(*s, now);
  const UserRecord user = kb_.get_user(s->session.user_id);
  if (user.status == UserStatus::kLocked) throw IamError(ErrorCode::kUserLocked, "user is locked");

  KbBatch batch;
  batch.add(ServiceUpgrade{s->session.user_id, service_id, now});
  batch.add(entry_for(s->session, LogEvent::kServiceUpgraded, AuthMethod::kNone, now,
                      "service_id=" + service_id));
  kb_.commit(batch);
  return kb_.service_for(s->session.user_id, service_id);
}

void SessionEngine::unlock_user(const std::string& user_id) {
  std::lock_guard lock(login_mutex_);
  kb_.unlock_user(user_id);
  a1_failures_.erase(user_id);
}

std::optional<Session> SessionEngine::find_session(const std::string& session_id) const {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->session;
}

Session SessionEngine::require_session(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  require_live(*s, clock_.now());
  return s->session;
}

}  // namespace iam
