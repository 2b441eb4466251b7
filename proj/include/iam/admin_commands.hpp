#pragma once

// iamctl subcommands as plain functions so they can be driven from tests.
// Each returns the process exit code: 0 success, 1 domain error. Usage
// errors (exit 2) are the argument parser's business.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "iam/authenticators.hpp"
#include "iam/enrollment.hpp"
#include "iam/error_rates.hpp"
#include "iam/knowledge_base.hpp"
#include "iam/random.hpp"

namespace iam::admin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

struct CommandContext {
  KnowledgeBase& kb;
  RandomSource& random;
  PinDigest pin_digest = PinDigest::kSha256;
  std::ostream& out;
  std::ostream& err;
};

int enroll(CommandContext& ctx, const EnrollmentSpec& spec);
// One user per line: user_id, full_name, pin, template_seed, devices
// (tab-separated; devices as id:type[,id:type...] or "-").
int enroll_from_file(CommandContext& ctx, const std::filesystem::path& path);
int classify(CommandContext& ctx, const std::string& service_id, const std::string& name,
             Sensitivity sensitivity);
int unlock(CommandContext& ctx, const std::string& user_id);
int logs(CommandContext& ctx, const LogFilter& filter);
// Needs no knowledge base; prints "far=... frr=... trials=...".
int eval_rates(std::ostream& out, std::ostream& err, const ErrorRateParams& params);

// "id:type,id:type" -> devices; kInvalidArgument on a bad item.
std::vector<EnrollmentDevice> parse_device_list(std::string_view text);

}  // namespace iam::admin
