#include "iam/gateway.hpp"

#include <openssl/crypto.h>

#include <regex>

#include "httplib.h"
#include "iam/api_error.hpp"
#include "iam/device_detection.hpp"
#include "iam/enrollment.hpp"
#include "iam/error.hpp"

namespace iam {

using nlohmann::json;

namespace {

constexpr std::size_t kBearerTokenBytes = 32;

// Failures that originate in the transport layer rather than the core.
struct HttpFailure {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void malformed(const std::string& what) {
  throw HttpFailure{422, "MALFORMED_REQUEST", what};
}

json error_body(const std::string& code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}};
}

json parse_body(const ApiRequest& request) {
  if (request.body.empty()) return json::object();
  json body = json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) malformed("body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) malformed(std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(std::string(key) + " must be a string");
  return it->get<std::string>();
}

Geolocation parse_geolocation(const json& body) {
  auto it = body.find("geolocation");
  if (it == body.end() || it->is_null()) return Geolocation::unknown();
  if (!it->is_object() || !it->contains("latitude") || !it->contains("longitude") ||
      !(*it)["latitude"].is_number() || !(*it)["longitude"].is_number()) {
    malformed("geolocation needs numeric latitude and longitude");
  }
  return Geolocation::declared((*it)["latitude"].get<double>(), (*it)["longitude"].get<double>());
}

std::optional<Amount> parse_amount(const json& body) {
  auto it = body.find("amount");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (it->is_number_unsigned()) return Amount{static_cast<std::int64_t>(it->get<std::uint64_t>()) * 100};
  if (it->is_string()) {
    if (auto a = Amount::parse(it->get<std::string>())) return a;
  }
  malformed("amount must be a decimal string like \"125.50\" or a whole number");
}

json geolocation_json(const Geolocation& g) {
  json j{{"source", to_string(g.source)}};
  if (g.latitude) j["latitude"] = *g.latitude;
  if (g.longitude) j["longitude"] = *g.longitude;
  return j;
}

json service_json(const ServiceDefinition& s) {
  return json{{"service_id", s.service_id},
              {"name", s.name},
              {"sensitivity", to_string(s.sensitivity)},
              {"classified_by", to_string(s.classified_by)}};
}

}  // namespace

json to_json(const UserLogEntry& e) {
  return json{{"entry_id", e.entry_id},
              {"timestamp", format_rfc3339(e.timestamp)},
              {"session_id", e.session_id},
              {"user_id", e.user_id},
              {"event", to_string(e.event)},
              {"device_type", to_string(e.device_type)},
              {"auth_method_used", to_string(e.auth_method_used)},
              {"geolocation", geolocation_json(e.geolocation)},
              {"detail", e.detail}};
}

Gateway::Gateway(SessionEngine& engine, KnowledgeBase& kb, RandomSource& enrollment_random,
                 RandomSource& token_random, GatewayOptions options)
    : engine_(engine),
      kb_(kb),
      enrollment_random_(enrollment_random),
      token_random_(token_random),
      options_(std::move(options)) {}

ApiResponse Gateway::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const IamError& e) {
    const ApiError err = to_api_error(e.code());
    return ApiResponse{err.http_status, error_body(err.code, err.message), err.code};
  } catch (const HttpFailure& f) {
    return ApiResponse{f.status, error_body(f.code, f.message), f.code};
  } catch (const json::exception&) {
    return ApiResponse{422, error_body("MALFORMED_REQUEST", "Malformed request."), "MALFORMED_REQUEST"};
  }
}

ApiResponse Gateway::route(const ApiRequest& r) {
  static const std::regex kUpgrade(R"(/api/v1/services/([^/]+)/upgrade)");
  static const std::regex kUnlock(R"(/api/v1/admin/users/([^/]+)/unlock)");
  std::smatch m;

  if (r.method == "POST") {
    if (r.path == "/api/v1/login") return login(r);
    if (r.path == "/api/v1/transactions") return transactions(r);
    if (r.path == "/api/v1/step-up") return step_up(r);
    if (r.path == "/api/v1/logout") return logout(r);
    if (std::regex_match(r.path, m, kUpgrade)) return upgrade(r, m[1]);
    if (r.path == "/api/v1/admin/users") {
      require_admin(r);
      return admin_enroll(r);
    }
    if (r.path == "/api/v1/admin/services") {
      require_admin(r);
      return admin_classify(r);
    }
    if (std::regex_match(r.path, m, kUnlock)) {
      require_admin(r);
      return admin_unlock(m[1]);
    }
  } else if (r.method == "GET") {
    if (r.path == "/api/v1/services") return services(r);
    if (r.path == "/api/v1/logs") return own_logs(r);
    if (r.path == "/api/v1/admin/logs") {
      require_admin(r);
      return admin_logs(r);
    }
  }
  // No downgrade route exists; anything else lands here.
  throw HttpFailure{404, "UNKNOWN_ROUTE", "No such endpoint."};
}

std::string Gateway::session_for(const ApiRequest& request) const {
  auto it = request.headers.find("authorization");
  constexpr std::string_view kBearer = "Bearer ";
  if (it == request.headers.end() || !it->second.starts_with(kBearer)) {
    throw IamError(ErrorCode::kNotAuthenticated, "missing bearer token");
  }
  const std::string token = it->second.substr(kBearer.size());
  std::lock_guard lock(tokens_mutex_);
  auto found = token_sessions_.find(token);
  if (found == token_sessions_.end()) throw IamError(ErrorCode::kNotAuthenticated, "unknown token");
  return found->second;
}

void Gateway::require_admin(const ApiRequest& request) const {
  auto it = request.headers.find("x-admin-key");
  const bool ok = !options_.admin_key.empty() && it != request.headers.end() &&
                  it->second.size() == options_.admin_key.size() &&
                  CRYPTO_memcmp(it->second.data(), options_.admin_key.data(), it->second.size()) == 0;
  if (!ok) throw HttpFailure{401, "ADMIN_UNAUTHORIZED", "Admin credentials required."};
}

// ---------------------------------------------------------------------------

ApiResponse Gateway::login(const ApiRequest& r) {
  const json body = parse_body(r);
  LoginRequest req;
  req.user_id = required_string(body, "user_id");
  const auto method = parse_a1_method(required_string(body, "method"));
  if (!method || *method == A1Method::kNone) malformed("method must be pin or fingerprint");
  req.method = *method;
  req.pin = optional_string(body, "pin");
  req.device_id = optional_string(body, "device_id");
  if (auto hex = optional_string(body, "fingerprint_probe_hex")) {
    req.fingerprint_probe = BiometricTemplate::from_hex(TemplateKind::kFingerprint, *hex);
  }

  std::optional<DeviceType> declared;
  if (auto t = optional_string(body, "device_type")) {
    declared = parse_device_type(*t);
    if (!declared) malformed("unknown device_type");
  }
  auto agent = r.headers.find("user-agent");
  const DeviceDecision device =
      decide_device(declared, agent == r.headers.end() ? std::string_view{} : agent->second);
  req.device_type = device.type;
  req.geolocation = parse_geolocation(body);

  const std::string note = std::string("device=") + std::string(to_string(device.type)) +
                           " source=" + (device.source == DeviceSource::kDeclared ? "declared" : "agent");

  const LoginResult result = engine_.login(req);
  if (const auto* denied = std::get_if<Denied>(&result)) {
    json b = error_body("A1_DENIED", "Sign-in failed.");
    b["attempts_remaining"] = denied->attempts_remaining;
    b["locked"] = denied->reason == Denied::Reason::kLockedOut;
    return ApiResponse{401, b, note + " A1_DENIED"};
  }
  const Session& s = std::get<Session>(result);
  const std::string token = token_random_.hex(kBearerTokenBytes);
  {
    std::lock_guard lock(tokens_mutex_);
    token_sessions_[token] = s.session_id;
  }
  return ApiResponse{200,
                     json{{"session_id", s.session_id},
                          {"token", token},
                          {"status", status_code(s.status.label())},
                          {"a1_method", to_string(s.a1_method)},
                          {"device_type", to_string(s.device_type)},
                          {"expires_at", format_rfc3339(s.expires_at)}},
                     note};
}

ApiResponse Gateway::services(const ApiRequest& r) {
  const Session s = engine_.require_session(session_for(r));
  json list = json::array();
  for (const auto& svc : kb_.services_for(s.user_id)) list.push_back(service_json(svc));
  return ApiResponse{200, list, {}};
}

ApiResponse Gateway::transactions(const ApiRequest& r) {
  const std::string session_id = session_for(r);
  const json body = parse_body(r);
  const std::string service_id = required_string(body, "service_id");
  const auto amount = parse_amount(body);

  const InitiateResult result = engine_.initiate_transaction(session_id, service_id, amount);
  if (const auto* challenge = std::get_if<StepUpChallenge>(&result)) {
    const auto& c = challenge->challenge;
    return ApiResponse{200,
                       json{{"step_up_required", true},
                            {"challenge", c.token},
                            {"required_method", to_string(challenge->required_method)},
                            {"service_id", challenge->service_id},
                            {"expires_at", format_rfc3339(c.issued_at + std::chrono::seconds{c.ttl_seconds})}},
                       {}};
  }
  const Executed& done = std::get<Executed>(result);
  return ApiResponse{200,
                     json{{"executed", true},
                          {"transaction_id", done.transaction.transaction_id},
                          {"status", status_code(done.status_after.label())}},
                     {}};
}

ApiResponse Gateway::step_up(const ApiRequest& r) {
  const std::string session_id = session_for(r);
  const json body = parse_body(r);
  const std::string token = required_string(body, "challenge");
  const auto probe = BiometricTemplate::from_hex(TemplateKind::kFace, required_string(body, "face_probe_hex"));

  const StepUpResult result = engine_.complete_step_up(session_id, token, probe);
  if (const auto* denied = std::get_if<Denied>(&result)) {
    if (denied->reason == Denied::Reason::kRefused) {
      return ApiResponse{403, error_body("TRANSACTION_REFUSED", "Verification failed too often; the transaction was refused."),
                         "TRANSACTION_REFUSED"};
    }
    json b = error_body("A2_DENIED", "Face verification failed.");
    b["attempts_remaining"] = denied->attempts_remaining;
    return ApiResponse{403, b, "A2_DENIED"};
  }
  const Executed& done = std::get<Executed>(result);
  return ApiResponse{200,
                     json{{"executed", true},
                          {"transaction_id", done.transaction.transaction_id},
                          {"status", status_code(done.status_after.label())}},
                     {}};
}

ApiResponse Gateway::upgrade(const ApiRequest& r, const std::string& service_id) {
  const auto svc = engine_.upgrade_service_for_session(session_for(r), service_id);
  return ApiResponse{200, json{{"service_id", svc.service_id}, {"sensitivity", to_string(svc.sensitivity)}}, {}};
}

ApiResponse Gateway::logout(const ApiRequest& r) {
  const std::string session_id = session_for(r);
  engine_.logout(session_id);
  {
    std::lock_guard lock(tokens_mutex_);
    std::erase_if(token_sessions_, [&](const auto& kv) { return kv.second == session_id; });
  }
  return ApiResponse{200, json{{"status", status_code(StatusLabel::kOffline)}}, {}};
}

ApiResponse Gateway::own_logs(const ApiRequest& r) {
  const Session s = engine_.require_session(session_for(r));
  LogFilter filter;
  filter.user_id = s.user_id;
  if (auto it = r.query.find("session_id"); it != r.query.end()) filter.session_id = it->second;
  json list = json::array();
  for (const auto& e : kb_.query_logs(filter)) list.push_back(to_json(e));
  return ApiResponse{200, list, {}};
}

// ---------------------------------------------------------------------------

ApiResponse Gateway::admin_enroll(const ApiRequest& r) {
  const json body = parse_body(r);
  EnrollmentSpec spec;
  spec.user_id = required_string(body, "user_id");
  spec.full_name = optional_string(body, "full_name").value_or("");
  spec.pin = required_string(body, "pin");
  if (!body.contains("template_seed") || !body["template_seed"].is_number_unsigned()) {
    malformed("template_seed must be a non-negative integer");
  }
  spec.template_seed = body["template_seed"].get<std::uint64_t>();
  if (auto it = body.find("devices"); it != body.end()) {
    if (!it->is_array()) malformed("devices must be an array");
    for (const auto& d : *it) {
      if (!d.is_object()) malformed("device entries must be objects");
      auto type = parse_device_type(required_string(d, "device_type"));
      if (!type) malformed("unknown device_type");
      spec.devices.push_back({required_string(d, "device_id"), *type});
    }
  }
  const EnrollmentSummary s = enroll_user(kb_, enrollment_random_, spec, options_.pin_digest);
  json refs = json::object();
  for (const auto& [device, ref] : s.fingerprint_refs) refs[device] = ref;
  return ApiResponse{201,
                     json{{"user_id", s.user_id}, {"face_template_ref", s.face_template_ref}, {"fingerprint_refs", refs}},
                     {}};
}

ApiResponse Gateway::admin_unlock(const std::string& user_id) {
  engine_.unlock_user(user_id);
  return ApiResponse{200, json{{"user_id", user_id}, {"status", "active"}}, {}};
}

ApiResponse Gateway::admin_classify(const ApiRequest& r) {
  const json body = parse_body(r);
  auto sensitivity = parse_sensitivity(required_string(body, "sensitivity"));
  if (!sensitivity) malformed("sensitivity must be A1 or A2");
  const auto svc = kb_.upsert_service(ServiceDefinition{required_string(body, "service_id"),
                                                        optional_string(body, "name").value_or(""),
                                                        *sensitivity, ClassifiedBy::kBank, std::nullopt});
  return ApiResponse{200, service_json(svc), {}};
}

ApiResponse Gateway::admin_logs(const ApiRequest& r) {
  LogFilter filter;
  auto q = [&](const char* key) -> std::optional<std::string> {
    auto it = r.query.find(key);
    if (it == r.query.end()) return std::nullopt;
    return it->second;
  };
  filter.user_id = q("user_id");
  filter.session_id = q("session_id");
  if (auto e = q("event")) {
    filter.event = parse_log_event(*e);
    if (!filter.event) malformed("unknown event");
  }
  for (auto [key, slot] : {std::pair{"from", &filter.from}, std::pair{"to", &filter.to}}) {
    if (auto t = q(key)) {
      *slot = parse_rfc3339(*t);
      if (!*slot) malformed(std::string(key) + " must be RFC 3339 UTC");
    }
  }
  json list = json::array();
  for (const auto& e : kb_.query_logs(filter)) list.push_back(to_json(e));
  return ApiResponse{200, list, {}};
}

// ---------------------------------------------------------------------------

void Gateway::mount(httplib::Server& server) {
  auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    api.body = req.body;
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      api.headers[key] = v;
    }
    for (const auto& [k, v] : req.params) api.query[k] = v;

    const ApiResponse out = handle(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");

    if (options_.request_log) {
      std::lock_guard lock(log_mutex_);
      *options_.request_log << req.method << ' ' << req.path << ' ' << out.status;
      if (!out.note.empty()) *options_.request_log << ' ' << out.note;
      *options_.request_log << std::endl;
    }
  };
  const std::string any = R"(.*)";
  server.Get(any, adapter);
  server.Post(any, adapter);
  server.Put(any, adapter);
  server.Patch(any, adapter);
  server.Delete(any, adapter);
}

}  // namespace iam
