#include "iam/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "iam/error.hpp"
#include "json.hpp"

namespace iam {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw IamError(ErrorCode::kInvalidArgument, "config: " + what);
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  if (!doc.is_object()) bad("top level must be an object");

  static const std::set<std::string> kKnown = {
      "bind_address", "port", "data_root", "session_ttl_seconds", "challenge_ttl_seconds",
      "max_a1_failures", "max_a2_failures", "sensitive_mode_scope", "fingerprint_threshold",
      "face_threshold", "pin_digest", "capture_noise", "run_seed", "admin_key",
      "expect_tls_termination", "request_log"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKnown.contains(key)) bad("unknown key " + key);
  }

  AppConfig c;
  try {
    c.bind_address = doc.value("bind_address", c.bind_address);
    c.port = doc.value("port", c.port);
    c.data_root = doc.value("data_root", c.data_root.string());
    c.engine.session_ttl_seconds = doc.value("session_ttl_seconds", c.engine.session_ttl_seconds);
    c.engine.challenge_ttl_seconds = doc.value("challenge_ttl_seconds", c.engine.challenge_ttl_seconds);
    c.engine.max_a1_failures = doc.value("max_a1_failures", c.engine.max_a1_failures);
    c.engine.max_a2_failures = doc.value("max_a2_failures", c.engine.max_a2_failures);
    c.engine.fingerprint_threshold = doc.value("fingerprint_threshold", c.engine.fingerprint_threshold);
    c.engine.face_threshold = doc.value("face_threshold", c.engine.face_threshold);
    c.capture_noise = doc.value("capture_noise", c.capture_noise);
    c.admin_key = doc.value("admin_key", c.admin_key);
    c.expect_tls_termination = doc.value("expect_tls_termination", c.expect_tls_termination);
    c.request_log = doc.value("request_log", c.request_log);
    if (doc.contains("run_seed") && !doc["run_seed"].is_null()) {
      c.run_seed = doc["run_seed"].get<std::uint64_t>();
    }
    if (doc.contains("sensitive_mode_scope")) {
      auto scope = parse_sensitive_mode_scope(doc["sensitive_mode_scope"].get<std::string>());
      if (!scope) bad("sensitive_mode_scope must be single_transaction or session");
      c.engine.sensitive_mode_scope = *scope;
    }
    if (doc.contains("pin_digest")) {
      auto digest = parse_pin_digest(doc["pin_digest"].get<std::string>());
      if (!digest) bad("pin_digest must be sha256 or sha512");
      c.engine.pin_digest = *digest;
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }

  if (c.port < 0 || c.port > 65535) bad("port out of range");
  if (!(c.capture_noise >= 0.0 && c.capture_noise <= 0.5)) bad("capture_noise outside [0, 0.5]");
  c.engine.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_config(env);
  return AppConfig{};
}

}  // namespace iam
