#include "iam/admin_commands.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "iam/error.hpp"
#include "iam/tsv.hpp"

namespace iam::admin {

namespace {

template <typename F>
int run(std::ostream& err, F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const IamError& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitDomainError;
  }
}

void print_summary(std::ostream& out, const EnrollmentSummary& s) {
  out << "enrolled user_id=" << s.user_id << " face_ref=" << s.face_template_ref
      << " fingerprint_refs=";
  if (s.fingerprint_refs.empty()) out << '-';
  for (std::size_t i = 0; i < s.fingerprint_refs.size(); ++i) {
    if (i) out << ',';
    out << s.fingerprint_refs[i].first << ':' << s.fingerprint_refs[i].second;
  }
  out << '\n';
}

}  // namespace

std::vector<EnrollmentDevice> parse_device_list(std::string_view text) {
  std::vector<EnrollmentDevice> devices;
  if (text.empty() || text == "-") return devices;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == text.npos ? std::string_view{} : text.substr(comma + 1);
    auto colon = item.find(':');
    if (colon == item.npos) {
      throw IamError(ErrorCode::kInvalidArgument, "device must be id:type, got " + std::string(item));
    }
    auto type = parse_device_type(item.substr(colon + 1));
    if (!type) throw IamError(ErrorCode::kInvalidArgument, "unknown device type in " + std::string(item));
    devices.push_back({std::string(item.substr(0, colon)), *type});
  }
  return devices;
}

int enroll(CommandContext& ctx, const EnrollmentSpec& spec) {
  return run(ctx.err, [&] { print_summary(ctx.out, enroll_user(ctx.kb, ctx.random, spec, ctx.pin_digest)); });
}

int enroll_from_file(CommandContext& ctx, const std::filesystem::path& path) {
  return run(ctx.err, [&] {
    std::ifstream in(path);
    if (!in) throw IamError(ErrorCode::kNotFound, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    // Parse everything first so a bad line enrolls nobody.
    std::vector<EnrollmentSpec> specs;
    for (const auto& f : tsv::parse(ss.str())) {
      if (f.size() != 5) throw IamError(ErrorCode::kInvalidArgument, "enrollment rows need 5 columns");
      EnrollmentSpec spec;
      spec.user_id = f[0];
      spec.full_name = f[1];
      spec.pin = f[2];
      auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), spec.template_seed);
      if (ec != std::errc{} || p != f[3].data() + f[3].size()) {
        throw IamError(ErrorCode::kInvalidArgument, "bad template seed for " + f[0]);
      }
      spec.devices = parse_device_list(f[4]);
      specs.push_back(std::move(spec));
    }
    for (const auto& spec : specs) {
      print_summary(ctx.out, enroll_user(ctx.kb, ctx.random, spec, ctx.pin_digest));
    }
  });
}

int classify(CommandContext& ctx, const std::string& service_id, const std::string& name,
             Sensitivity sensitivity) {
  return run(ctx.err, [&] {
    auto s = ctx.kb.upsert_service(ServiceDefinition{service_id, name, sensitivity, ClassifiedBy::kBank, std::nullopt});
    ctx.out << "classified service_id=" << s.service_id << " sensitivity=" << to_string(s.sensitivity) << '\n';
  });
}

int unlock(CommandContext& ctx, const std::string& user_id) {
  return run(ctx.err, [&] {
    ctx.kb.unlock_user(user_id);
    ctx.out << "unlocked user_id=" << user_id << '\n';
  });
}

int logs(CommandContext& ctx, const LogFilter& filter) {
  return run(ctx.err, [&] {
    for (const auto& e : ctx.kb.query_logs(filter)) ctx.out << tsv::encode(e);
  });
}

int eval_rates(std::ostream& out, std::ostream& err, const ErrorRateParams& params) {
  return run(err, [&] { out << format_error_rates(evaluate_error_rates(params)) << '\n'; });
}

}  // namespace iam::admin
