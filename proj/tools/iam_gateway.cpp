// HTTP gateway. Usage: iam-gateway [--config path] (or IAM_CONFIG).

#include <atomic>
#include <condition_variable>
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "iam/config.hpp"
#include "iam/error.hpp"
#include "iam/gateway.hpp"
#include "iam/storage.hpp"

namespace {

using namespace iam;

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::unique_ptr<RandomSource> stream(const AppConfig& config, SeedPurpose purpose) {
  if (config.run_seed) return std::make_unique<SeededRandom>(derive_seed(*config.run_seed, purpose));
  return std::make_unique<SystemRandom>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iam-gateway: two-level authentication gateway"};
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON config file (default: $IAM_CONFIG)");
  CLI11_PARSE(app, argc, argv);

  AppConfig config;
  try {
    config = resolve_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
    config.engine.validate();
  } catch (const IamError& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  if (config.run_seed) {
    std::cerr << "warning: run_seed is set; ids and tokens are predictable\n";
  }
  if (config.admin_key.empty()) {
    std::cerr << "note: admin_key is empty; admin routes are disabled\n";
  }

  try {
    DirectoryStorage storage(config.data_root);
    KnowledgeBase kb(storage);
    SystemClock clock;
    auto ids = stream(config, SeedPurpose::kEngineIds);
    auto salts = stream(config, SeedPurpose::kEnrollmentSalts);
    auto tokens = stream(config, SeedPurpose::kGatewayTokens);
    SessionEngine engine(kb, clock, *ids, config.engine);
    Gateway gateway(engine, kb, *salts, *tokens,
                    GatewayOptions{config.admin_key, config.engine.pin_digest,
                                   config.request_log ? &std::cout : nullptr});

    httplib::Server server;
    gateway.mount(server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    // Expire idle sessions so their timeout entries land close to the TTL.
    std::mutex m;
    std::condition_variable cv;
    bool done = false;
    std::thread sweeper([&] {
      std::unique_lock lock(m);
      while (!cv.wait_for(lock, std::chrono::seconds(5), [&] { return done; })) {
        try {
          engine.sweep_expired(clock.now());
        } catch (const IamError& e) {
          std::cerr << "sweep: " << error_code_name(e.code()) << ": " << e.what() << '\n';
        }
      }
    });

    std::cerr << "listening on " << config.bind_address << ':' << config.port
              << (config.expect_tls_termination ? " (expects TLS termination in front)" : "") << '\n';
    const bool ok = server.listen(config.bind_address, config.port);

    {
      std::lock_guard lock(m);
      done = true;
    }
    cv.notify_all();
    sweeper.join();
    if (!ok) {
      std::cerr << "error: cannot listen on " << config.bind_address << ':' << config.port << '\n';
      return 1;
    }
  } catch (const IamError& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
