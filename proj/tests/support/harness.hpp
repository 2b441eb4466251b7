#pragma once

// A one-user world for driving the engine with the reference model's
// events, plus the log-replay checks shared by the unit and acceptance
// suites.

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "iam/enrollment.hpp"
#include "iam/error.hpp"
#include "iam/session_engine.hpp"
#include "iam/storage.hpp"
#include "reference_model.hpp"

namespace harness {

using namespace iam;

inline constexpr const char* kUser = "u1";
inline constexpr const char* kPin = "48213377";
inline constexpr std::uint64_t kSeed = 11;
inline constexpr const char* kA1Service = "statement";
inline constexpr const char* kA2Service = "transfer";

inline Instant epoch() { return Instant{std::chrono::seconds{1'780'000'000}}; }

inline BiometricTemplate inverted(const BiometricTemplate& t) {
  auto w = t.words();
  for (auto& x : w) x = ~x;
  return BiometricTemplate{t.kind(), w};
}

struct World {
  MemoryStorage storage;
  KnowledgeBase kb{storage};
  ManualClock clock{epoch()};
  SeededRandom ids{derive_seed(kSeed, SeedPurpose::kEngineIds)};
  SeededRandom salts{derive_seed(kSeed, SeedPurpose::kEnrollmentSalts)};
  std::unique_ptr<SessionEngine> engine;

  std::string current = "s-none";
  std::string last_token = "no-such-token";

  explicit World(const model::Params& p) {
    EnrollmentSpec spec;
    spec.user_id = kUser;
    spec.full_name = "Test User";
    spec.pin = kPin;
    spec.devices = {{"phone-1", DeviceType::kSmartphone}};
    spec.template_seed = kSeed;
    enroll_user(kb, salts, spec);
    kb.upsert_service({kA1Service, "Statement", Sensitivity::kA1, ClassifiedBy::kBank, std::nullopt});
    kb.upsert_service({kA2Service, "Funds transfer", Sensitivity::kA2, ClassifiedBy::kBank, std::nullopt});

    EngineConfig cfg;
    cfg.session_ttl_seconds = p.session_ttl;
    cfg.challenge_ttl_seconds = p.challenge_ttl;
    cfg.max_a1_failures = p.max_a1;
    cfg.max_a2_failures = p.max_a2;
    cfg.sensitive_mode_scope =
        p.session_scope ? SensitiveModeScope::kSession : SensitiveModeScope::kSingleTransaction;
    engine = std::make_unique<SessionEngine>(kb, clock, ids, cfg);
  }

  std::int64_t now() const { return clock.now().time_since_epoch().count(); }

  // Applies one event; the clock moves one second first (timeouts jump
  // past the session TTL).
  std::string apply(model::Event e) {
    clock.advance(std::chrono::seconds{1});
    try {
      switch (e) {
        case model::Event::kLoginOk:
        case model::Event::kLoginFail: {
          LoginRequest r;
          r.user_id = kUser;
          r.method = A1Method::kPin;
          r.pin = e == model::Event::kLoginOk ? kPin : "00000000";
          auto res = engine->login(r);
          if (auto* s = std::get_if<Session>(&res)) {
            current = s->session_id;
            last_token = "no-such-token";
            return "session";
          }
          return std::get<Denied>(res).reason == Denied::Reason::kLockedOut ? "locked_out" : "denied";
        }
        case model::Event::kInitiateA1:
        case model::Event::kInitiateA2: {
          auto res = engine->initiate_transaction(
              current, e == model::Event::kInitiateA1 ? kA1Service : kA2Service);
          if (auto* c = std::get_if<StepUpChallenge>(&res)) {
            last_token = c->challenge.token;
            return "challenge";
          }
          return "executed:" + std::string(status_code(std::get<Executed>(res).status_after.label()));
        }
        case model::Event::kStepUpOk:
        case model::Event::kStepUpFail: {
          auto face = enrolled_face_template(kSeed);
          if (e == model::Event::kStepUpFail) face = inverted(face);
          auto res = engine->complete_step_up(current, last_token, face);
          if (auto* x = std::get_if<Executed>(&res)) {
            return "executed:" + std::string(status_code(x->status_after.label()));
          }
          return std::get<Denied>(res).reason == Denied::Reason::kRefused ? "refused" : "denied";
        }
        case model::Event::kLogout:
          engine->logout(current);
          return "offline";
        case model::Event::kTimeout: {
          clock.advance(std::chrono::seconds{engine->config().session_ttl_seconds + 1});
          return "swept:" + std::to_string(engine->sweep_expired(clock.now()));
        }
      }
    } catch (const IamError& err) {
      return "error:" + std::string(error_code_name(err.code()));
    }
    return "?";
  }

  // Table status of the current session as the engine reports it.
  std::string engine_status() const {
    auto s = engine->find_session(current);
    if (!s) return "S-1";
    return std::string(status_code(s->status.label()));
  }
};

// User-log entries each outcome must add: one per state transition or
// audited refusal. Errors and challenge issuance add none.
inline std::size_t expected_log_entries(model::Event e, const std::string& outcome) {
  if (outcome.rfind("error:", 0) == 0 || outcome == "challenge") return 0;
  if (outcome.rfind("swept:", 0) == 0) return std::stoul(outcome.substr(6));
  if (outcome == "locked_out" || outcome == "refused") return 2;
  if (outcome.rfind("executed", 0) == 0) return e == model::Event::kStepUpOk ? 2 : 1;
  return 1;
}

struct LogCheck {
  bool ok = true;
  std::string why;
  // Status of `session_id` after replaying its entries.
  std::string replayed_status = "S-1";
};

inline std::string detail_value(const std::string& detail, const std::string& key) {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while (pos < detail.size()) {
    const auto end = detail.find(';', pos);
    const std::string item = detail.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (item.rfind(needle, 0) == 0) return item.substr(needle.size());
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return {};
}

// Replays every session's log and checks:
//   - the (a1, a2) pair after each entry is one of (0,0), (1,0), (1,1);
//   - each A2 transaction executes while a2 = 1;
//   - each A2 transaction is preceded, since the session's previous A2
//     transaction, by exactly one a2_granted for the same service.
// With session scope, only the first A2 transaction after a grant needs it.
inline LogCheck check_logs(const KnowledgeBase& kb, const std::string& session_id, bool session_scope) {
  LogCheck out;
  struct Replay {
    bool a1 = false, a2 = false;
    int grants_since_tx = 0;
    std::string granted_service;
  };
  std::map<std::string, Replay> sessions;
  for (const auto& e : kb.query_logs()) {
    if (e.session_id.empty()) continue;
    Replay& r = sessions[e.session_id];
    switch (e.event) {
      case LogEvent::kA1Granted: r.a1 = true; r.a2 = false; break;
      case LogEvent::kA2Granted:
        if (!r.a1) { out.ok = false; out.why = "a2_granted while a1 = 0"; }
        r.a2 = true;
        ++r.grants_since_tx;
        r.granted_service = detail_value(e.detail, "service_id");
        break;
      case LogEvent::kTxExecuted: {
        if (!r.a1) { out.ok = false; out.why = "transaction while offline"; }
        if (detail_value(e.detail, "level") == "A2") {
          if (!r.a2) { out.ok = false; out.why = "A2 transaction while a2 = 0"; }
          const bool fresh_grant = r.grants_since_tx > 0;
          if (!(r.grants_since_tx == 1 || (session_scope && r.grants_since_tx == 0 && r.a2))) {
            out.ok = false;
            out.why = "A2 transaction preceded by " + std::to_string(r.grants_since_tx) + " grants";
          }
          if (fresh_grant && r.granted_service != detail_value(e.detail, "service_id")) {
            out.ok = false; out.why = "grant and transaction name different services";
          }
          r.grants_since_tx = 0;
        }
        const std::string after = detail_value(e.detail, "status_after");
        if (after == "S-2") r.a2 = false;
        break;
      }
      case LogEvent::kLogout:
      case LogEvent::kTimeout: r.a1 = false; r.a2 = false; break;
      default: break;
    }
    if (!r.a1 && r.a2) { out.ok = false; out.why = "replayed (0,1)"; }
  }
  if (auto it = sessions.find(session_id); it != sessions.end()) {
    out.replayed_status = !it->second.a1 ? "S-1" : (it->second.a2 ? "S-3" : "S-2");
  }
  return out;
}

}  // namespace harness
