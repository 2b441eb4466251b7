#pragma once

// HTTP/JSON surface of the gateway under /api/v1. Request handling is
// transport-independent (Gateway::handle) and mount() binds it to a
// cpp-httplib server.
//
//   POST /api/v1/login                      -> {session_id, token, status, a1_method, ...}
//   GET  /api/v1/services                   -> [{service_id, name, sensitivity, classified_by}]
//   POST /api/v1/transactions               -> {executed, transaction_id} | {step_up_required, challenge, required_method}
//   POST /api/v1/step-up                    -> {executed, transaction_id, status}
//   POST /api/v1/services/{id}/upgrade      -> {service_id, sensitivity: "A2"}
//   POST /api/v1/logout                     -> {status: "S-1"}
//   GET  /api/v1/logs[?session_id=]         -> caller's own log entries
//   POST /api/v1/admin/users                -> enrolment summary
//   POST /api/v1/admin/users/{id}/unlock
//   POST /api/v1/admin/services             -> bank classification
//   GET  /api/v1/admin/logs[?user_id&session_id&event&from&to]
//
// The session bearer token travels only in "Authorization: Bearer <token>";
// admin routes need "X-Admin-Key".

#include <map>
#include <mutex>
#include <ostream>
#include <string>

#include "iam/authenticators.hpp"
#include "iam/knowledge_base.hpp"
#include "iam/random.hpp"
#include "iam/session_engine.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace iam {

struct ApiRequest {
  std::string method;
  std::string path;  // without query string
  std::map<std::string, std::string> headers;  // lowercase keys
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
  std::string note;  // appended to the request-log line, never sent
};

struct GatewayOptions {
  std::string admin_key;  // empty disables the admin routes
  PinDigest pin_digest = PinDigest::kSha256;
  std::ostream* request_log = nullptr;
};

class Gateway {
 public:
  // `enrollment_random` salts PINs for admin enrolment; `token_random`
  // mints bearer tokens and is kept separate so tokens never perturb the
  // engine's id stream.
  Gateway(SessionEngine& engine, KnowledgeBase& kb, RandomSource& enrollment_random,
          RandomSource& token_random, GatewayOptions options = {});

  ApiResponse handle(const ApiRequest& request);

  // Installs catch-all handlers on every method; one request-log line per
  // request goes to options.request_log.
  void mount(httplib::Server& server);

 private:
  ApiResponse route(const ApiRequest& request);
  std::string session_for(const ApiRequest& request) const;
  void require_admin(const ApiRequest& request) const;

  ApiResponse login(const ApiRequest& request);
  ApiResponse services(const ApiRequest& request);
  ApiResponse transactions(const ApiRequest& request);
  ApiResponse step_up(const ApiRequest& request);
  ApiResponse upgrade(const ApiRequest& request, const std::string& service_id);
  ApiResponse logout(const ApiRequest& request);
  ApiResponse own_logs(const ApiRequest& request);
  ApiResponse admin_enroll(const ApiRequest& request);
  ApiResponse admin_unlock(const std::string& user_id);
  ApiResponse admin_classify(const ApiRequest& request);
  ApiResponse admin_logs(const ApiRequest& request);

  SessionEngine& engine_;
  KnowledgeBase& kb_;
  RandomSource& enrollment_random_;
  RandomSource& token_random_;
  GatewayOptions options_;

  mutable std::mutex tokens_mutex_;
  std::map<std::string, std::string> token_sessions_;
  std::mutex log_mutex_;
};

nlohmann::json to_json(const UserLogEntry& entry);

}  // namespace iam
