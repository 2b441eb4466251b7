#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "iam/session_engine.hpp"

namespace iam {

// JSON config shared by the gateway and iamctl. Keys are documented in
// docs/config.md; unknown keys are rejected so typos fail loudly.
struct AppConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_root = "data";  // holds kb/ and devices/
  EngineConfig engine;
  double capture_noise = kDefaultCaptureNoise;
  // Seeds ids, salts and tokens for replayable demo runs. Leave unset in
  // any deployment.
  std::optional<std::uint64_t> run_seed;
  std::string admin_key;
  // Documentation flag: production deployments terminate TLS in front of
  // the gateway, which itself speaks plain HTTP.
  bool expect_tls_termination = true;
  bool request_log = true;
};

inline constexpr const char* kConfigEnvVar = "IAM_CONFIG";

// kInvalidArgument on bad JSON, unknown keys or out-of-range values.
AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);

// The explicit path if given, else $IAM_CONFIG, else defaults.
AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace iam
