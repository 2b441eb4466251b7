// Operator tool. Works on the same data root as the gateway.
//
//   iamctl enroll --user-id alice --full-name "Alice" --pin 4821 \
//                 --devices phone-1:smartphone,pc-1:desktop --template-seed 11
//   iamctl enroll --from-file users.tsv
//   iamctl classify --service-id funds-transfer --name "Funds transfer" --sensitivity A2
//   iamctl unlock --user-id alice
//   iamctl logs [--user-id ..] [--session-id ..] [--event ..] [--from ..] [--to ..]
//   iamctl eval-rates --n 100 --p 0.1 --tau 0.25 --trials 10000 --seed 7

#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "iam/admin_commands.hpp"
#include "iam/config.hpp"
#include "iam/error.hpp"
#include "iam/storage.hpp"

namespace {

using namespace iam;

std::unique_ptr<RandomSource> salt_source(const AppConfig& config) {
  if (config.run_seed) {
    return std::make_unique<SeededRandom>(derive_seed(*config.run_seed, SeedPurpose::kEnrollmentSalts));
  }
  return std::make_unique<SystemRandom>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iamctl: enrolment, classification and audit for the authentication gateway"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> data_root;
  app.add_option("--config", config_path, "JSON config file (default: $IAM_CONFIG)");
  app.add_option("--data-root", data_root, "Override the config's data_root");

  EnrollmentSpec spec;
  std::string devices_text = "-";
  std::optional<std::string> from_file;
  auto* enroll = app.add_subcommand("enroll", "Enroll a user");
  auto* single = enroll->add_option_group("single");
  single->add_option("--user-id", spec.user_id);
  single->add_option("--full-name", spec.full_name);
  single->add_option("--pin", spec.pin);
  single->add_option("--devices", devices_text, "id:type[,id:type...] or -");
  single->add_option("--template-seed", spec.template_seed);
  auto* file_opt = enroll->add_option("--from-file", from_file, "TSV: user_id full_name pin template_seed devices");

  std::string service_id, service_name, sensitivity_text;
  auto* classify = app.add_subcommand("classify", "Set a bank-level service sensitivity");
  classify->add_option("--service-id", service_id)->required();
  classify->add_option("--name", service_name);
  classify->add_option("--sensitivity", sensitivity_text)->required()->check(CLI::IsMember({"A1", "A2"}));

  std::string unlock_user;
  auto* unlock = app.add_subcommand("unlock", "Unlock a locked user");
  unlock->add_option("--user-id", unlock_user)->required();

  LogFilter filter;
  std::optional<std::string> event_text, from_text, to_text;
  auto* logs = app.add_subcommand("logs", "Print user-log entries in timestamp order");
  logs->add_option("--user-id", filter.user_id);
  logs->add_option("--session-id", filter.session_id);
  logs->add_option("--event", event_text);
  logs->add_option("--from", from_text, "RFC 3339 UTC, inclusive");
  logs->add_option("--to", to_text, "RFC 3339 UTC, inclusive");

  ErrorRateParams params;
  std::string kind_text = "fingerprint";
  auto* eval = app.add_subcommand("eval-rates", "Estimate FAR/FRR of the simulated matcher");
  eval->add_option("--n", params.population_size);
  eval->add_option("--p", params.noise_rate);
  eval->add_option("--tau", params.threshold);
  eval->add_option("--trials", params.trials);
  eval->add_option("--seed", params.seed);
  eval->add_option("--kind", kind_text)->check(CLI::IsMember({"fingerprint", "face"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? admin::kExitOk : admin::kExitUsage;
  }

  if (eval->parsed()) {
    params.kind = *parse_template_kind(kind_text);
    return admin::eval_rates(std::cout, std::cerr, params);
  }

  // Usage checks that CLI11 cannot express.
  if (enroll->parsed()) {
    const bool has_single = !spec.user_id.empty() || !spec.pin.empty();
    if (file_opt->count() > 0 && has_single) {
      std::cerr << "enroll: --from-file cannot be combined with per-user flags\n";
      return admin::kExitUsage;
    }
    if (file_opt->count() == 0 && (spec.user_id.empty() || spec.pin.empty())) {
      std::cerr << "enroll: --user-id and --pin are required (or --from-file)\n";
      return admin::kExitUsage;
    }
  }
  if (logs->parsed()) {
    if (event_text) {
      filter.event = parse_log_event(*event_text);
      if (!filter.event) {
        std::cerr << "logs: unknown event " << *event_text << '\n';
        return admin::kExitUsage;
      }
    }
    for (auto [text, slot] : {std::pair{&from_text, &filter.from}, std::pair{&to_text, &filter.to}}) {
      if (!*text) continue;
      *slot = parse_rfc3339(**text);
      if (!*slot) {
        std::cerr << "logs: timestamps must look like 2026-03-01T09:30:00Z\n";
        return admin::kExitUsage;
      }
    }
  }

  try {
    AppConfig config = resolve_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
    if (data_root) config.data_root = *data_root;

    DirectoryStorage storage(config.data_root);
    KnowledgeBase kb(storage);
    auto salts = salt_source(config);
    admin::CommandContext ctx{kb, *salts, config.engine.pin_digest, std::cout, std::cerr};

    if (enroll->parsed()) {
      if (from_file) return admin::enroll_from_file(ctx, *from_file);
      spec.devices = admin::parse_device_list(devices_text);
      return admin::enroll(ctx, spec);
    }
    if (classify->parsed()) {
      return admin::classify(ctx, service_id, service_name, *parse_sensitivity(sensitivity_text));
    }
    if (unlock->parsed()) return admin::unlock(ctx, unlock_user);
    if (logs->parsed()) return admin::logs(ctx, filter);
  } catch (const IamError& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return admin::kExitDomainError;
  }
  return admin::kExitUsage;
}
