#pragma once

// Table-driven reference for the session state machine: one user, one A1
// service, one A2 service. step() predicts the outcome the engine must
// produce for each event, written as a short string so mismatches print
// readably ("executed:S-2", "error:CHALLENGE_CONSUMED", ...).

#include <cstdint>
#include <string>
#include <vector>

namespace model {

enum class Event { kLoginOk, kLoginFail, kInitiateA1, kInitiateA2, kStepUpOk, kStepUpFail, kLogout, kTimeout };
inline constexpr int kEventCount = 8;

inline const char* name(Event e) {
  switch (e) {
    case Event::kLoginOk: return "login-ok";
    case Event::kLoginFail: return "login-fail";
    case Event::kInitiateA1: return "initiate-A1";
    case Event::kInitiateA2: return "initiate-A2";
    case Event::kStepUpOk: return "stepup-ok";
    case Event::kStepUpFail: return "stepup-fail";
    case Event::kLogout: return "logout";
    case Event::kTimeout: return "timeout";
  }
  return "?";
}

struct Params {
  std::int64_t session_ttl = 600;
  std::int64_t challenge_ttl = 3;
  int max_a1 = 3;
  int max_a2 = 3;
  bool session_scope = false;  // false: single_transaction
};

enum class Token { kNone, kPending, kConsumed, kLapsed };

struct SessionState {
  bool closed = false;
  bool pruned = false;  // dropped from memory one TTL after expiry
  int level = 1;  // 1 = S-2, 2 = S-3
  std::int64_t expires_at = 0;
  Token token = Token::kNone;
  std::int64_t issued_at = 0;
  int a2_failures = 0;
};

class Reference {
 public:
  explicit Reference(Params p) : p_(p) {}

  // `now` is the clock reading when the event is applied (after any
  // advance the harness performs for it).
  std::string step(Event e, std::int64_t now) {
    switch (e) {
      case Event::kLoginOk: {
        if (locked_) return "error:USER_LOCKED";
        a1_failures_ = 0;
        SessionState fresh;
        fresh.expires_at = now + p_.session_ttl;
        sessions_.push_back(fresh);
        current_ = static_cast<int>(sessions_.size()) - 1;
        return "session";
      }
      case Event::kLoginFail:
        if (locked_) return "error:USER_LOCKED";
        if (++a1_failures_ >= p_.max_a1) {
          locked_ = true;
          a1_failures_ = 0;
          return "locked_out";
        }
        return "denied";
      case Event::kInitiateA1: {
        if (auto err = live_error(now); !err.empty()) return err;
        return std::string("executed:") + status(cur());
      }
      case Event::kInitiateA2: {
        if (auto err = live_error(now); !err.empty()) return err;
        SessionState& s = cur();
        if (s.level == 2) return "executed:S-3";
        if (s.token == Token::kPending) {
          if (!expired(s, now)) return "error:CHALLENGE_PENDING";
        }
        s.token = Token::kPending;
        s.issued_at = now;
        s.a2_failures = 0;
        return "challenge";
      }
      case Event::kStepUpOk:
      case Event::kStepUpFail: {
        if (auto err = live_error(now); !err.empty()) return err;
        SessionState& s = cur();
        switch (s.token) {
          case Token::kNone: return "error:CHALLENGE_MISMATCH";
          case Token::kConsumed: return "error:CHALLENGE_CONSUMED";
          case Token::kLapsed: return "error:CHALLENGE_EXPIRED";
          case Token::kPending: break;
        }
        if (expired(s, now)) {
          s.token = Token::kLapsed;
          return "error:CHALLENGE_EXPIRED";
        }
        if (e == Event::kStepUpOk) {
          s.token = Token::kConsumed;
          s.a2_failures = 0;
          s.level = p_.session_scope ? 2 : 1;
          return std::string("executed:") + status(s);
        }
        if (++s.a2_failures >= p_.max_a2) {
          s.token = Token::kConsumed;
          s.a2_failures = 0;
          return "refused";
        }
        return "denied";
      }
      case Event::kLogout:
        if (current_ < 0 || cur().closed || cur().pruned) return "error:UNKNOWN_SESSION";
        cur().closed = true;
        return "offline";
      case Event::kTimeout: {
        int n = 0;
        for (auto& s : sessions_) {
          if (s.closed && s.expires_at + p_.session_ttl < now) s.pruned = true;
        }
        for (auto& s : sessions_) {
          if (!s.closed && s.expires_at < now) {
            s.closed = true;
            ++n;
          }
        }
        return "swept:" + std::to_string(n);
      }
    }
    return "?";
  }

  bool has_session() const { return current_ >= 0; }
  // "S-1" when there is no live current session.
  std::string current_status() const {
    if (current_ < 0 || sessions_[current_].closed) return "S-1";
    return status(sessions_[current_]);
  }

 private:
  static const char* status(const SessionState& s) { return s.closed ? "S-1" : (s.level == 2 ? "S-3" : "S-2"); }
  bool expired(const SessionState& s, std::int64_t now) const { return now > s.issued_at + p_.challenge_ttl; }
  SessionState& cur() { return sessions_[current_]; }

  std::string live_error(std::int64_t now) {
    if (current_ < 0 || cur().pruned) return "error:NOT_AUTHENTICATED";
    SessionState& s = cur();
    if (s.closed) return "error:SESSION_EXPIRED";
    if (s.expires_at < now) {
      s.closed = true;
      return "error:SESSION_EXPIRED";
    }
    return {};
  }

  Params p_;
  std::vector<SessionState> sessions_;
  int current_ = -1;
  int a1_failures_ = 0;
  bool locked_ = false;
};

}  // namespace model
