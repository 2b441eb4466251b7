#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "iam/admin_commands.hpp"
#include "iam/config.hpp"
#include "iam/error.hpp"
#include "iam/storage.hpp"
#include "iam/tsv.hpp"

using namespace iam;
namespace fs = std::filesystem;

namespace {

struct Ctx {
  MemoryStorage storage;
  KnowledgeBase kb{storage};
  SeededRandom random{4};
  std::ostringstream out, err;
  admin::CommandContext ctx{kb, random, PinDigest::kSha256, out, err};
};

std::size_t rows(const MemoryStorage& s, const std::string& path) {
  auto content = s.read(path);
  return content ? tsv::parse(*content).size() : 0;
}

fs::path scratch(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("iam-admin-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& cmd, std::string* output = nullptr) {
  const std::string full = cmd + " > iamctl.out 2>&1";
  const int status = std::system(full.c_str());
  if (output) {
    std::ifstream in("iamctl.out");
    std::ostringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("enroll one user with one smartphone") {
  Ctx c;
  CHECK(admin::enroll(c.ctx, {"alice", "Alice", "4821", {{"p1", DeviceType::kSmartphone}}, 7}) == admin::kExitOk);
  CHECK(rows(c.storage, kb_paths::kUsers) == 1);
  CHECK(rows(c.storage, kb_paths::kFaces) == 1);
  CHECK(rows(c.storage, kb_paths::device_fingerprints("p1")) == 1);
  CHECK(c.out.str() == "enrolled user_id=alice face_ref=face-00000001 fingerprint_refs=p1:fp-00000001\n");
}

TEST_CASE("enroll with only a desktop") {
  Ctx c;
  CHECK(admin::enroll(c.ctx, {"bob", "Bob", "4821", {{"pc", DeviceType::kDesktop}}, 8}) == admin::kExitOk);
  CHECK(rows(c.storage, kb_paths::kUsers) == 1);
  CHECK(rows(c.storage, kb_paths::kFaces) == 1);
  CHECK(c.storage.list() == std::vector<std::string>{kb_paths::kFaces, kb_paths::kUsers});
  CHECK(c.out.str().ends_with("fingerprint_refs=-\n"));
}

TEST_CASE("duplicate enrolment is a domain error") {
  Ctx c;
  admin::enroll(c.ctx, {"alice", "Alice", "4821", {}, 7});
  const auto before = c.storage.files();
  CHECK(admin::enroll(c.ctx, {"alice", "Alice", "4821", {}, 7}) == admin::kExitDomainError);
  CHECK(c.err.str().find("DUPLICATE_USER") != std::string::npos);
  CHECK(c.storage.files() == before);
}

TEST_CASE("enrolment validates before writing") {
  Ctx c;
  CHECK(admin::enroll(c.ctx, {"u", "", "12a4", {{"p", DeviceType::kTablet}}, 1}) == admin::kExitDomainError);
  CHECK(admin::enroll(c.ctx, {"u", "", "1234", {{"p", DeviceType::kTablet}, {"p", DeviceType::kSmartphone}}, 1}) ==
        admin::kExitDomainError);
  CHECK(admin::enroll(c.ctx, {"u", "", "1234", {{"a/b", DeviceType::kTablet}}, 1}) == admin::kExitDomainError);
  CHECK(c.storage.list().empty());
}

TEST_CASE("enrolled templates follow the seed") {
  Ctx c;
  admin::enroll(c.ctx, {"alice", "", "4821", {{"p1", DeviceType::kSmartphone}}, 7});
  const auto u = c.kb.get_user("alice");
  CHECK(c.kb.fetch_template(u.face_template_ref, StoreLocation::cloud()) == enrolled_face_template(7));
  CHECK(c.kb.fetch_template(*u.find_device("p1")->fingerprint_template_ref, StoreLocation::device("p1")) ==
        enrolled_fingerprint_template(7));
  CHECK_FALSE(enrolled_face_template(7).to_hex() == enrolled_fingerprint_template(7).to_hex());
}

TEST_CASE("classify then try to lower") {
  Ctx c;
  CHECK(admin::classify(c.ctx, "funds-transfer", "Funds transfer", Sensitivity::kA2) == admin::kExitOk);
  CHECK(c.out.str() == "classified service_id=funds-transfer sensitivity=A2\n");
  CHECK(admin::classify(c.ctx, "funds-transfer", "Funds transfer", Sensitivity::kA1) == admin::kExitDomainError);
  CHECK(c.err.str().find("MONOTONICITY_VIOLATION") != std::string::npos);
  CHECK(c.kb.get_service("funds-transfer").sensitivity == Sensitivity::kA2);
}

TEST_CASE("unlock and logs") {
  Ctx c;
  CHECK(admin::logs(c.ctx, {}) == admin::kExitOk);
  CHECK(c.out.str().empty());
  admin::enroll(c.ctx, {"alice", "", "4821", {}, 7});
  c.kb.lock_user("alice");
  c.out.str("");
  CHECK(admin::unlock(c.ctx, "alice") == admin::kExitOk);
  CHECK(c.out.str() == "unlocked user_id=alice\n");
  CHECK(c.kb.get_user("alice").status == UserStatus::kActive);
  CHECK(admin::unlock(c.ctx, "nobody") == admin::kExitDomainError);
}

TEST_CASE("eval-rates prints the documented line") {
  std::ostringstream out, err;
  CHECK(admin::eval_rates(out, err, {100, 0.1, 0.25, 10000, 7, TemplateKind::kFingerprint}) == admin::kExitOk);
  CHECK(out.str() == "far=0.000000 frr=0.000000 trials=10000\n");
  CHECK(admin::eval_rates(out, err, {100, 0.7, 0.25, 10, 7, TemplateKind::kFingerprint}) == admin::kExitDomainError);
}

TEST_CASE("enroll from file is all or nothing") {
  const auto dir = scratch("file");
  Ctx c;
  {
    std::ofstream f(dir / "good.tsv");
    f << "alice\tAlice Ng\t4821\t7\tp1:smartphone,pc:desktop\n";
    f << "bob\tBob\t90817263\t8\t-\n";
  }
  {
    std::ofstream f(dir / "bad.tsv");
    f << "carol\tCarol\t4821\t9\t-\n";
    f << "dave\tDave\t4821\tnot-a-seed\t-\n";
  }
  CHECK(admin::enroll_from_file(c.ctx, dir / "bad.tsv") == admin::kExitDomainError);
  CHECK(c.kb.users().empty());
  CHECK(admin::enroll_from_file(c.ctx, dir / "good.tsv") == admin::kExitOk);
  CHECK(c.kb.users().size() == 2);
  CHECK(admin::enroll_from_file(c.ctx, dir / "missing.tsv") == admin::kExitDomainError);
  fs::remove_all(dir);
}

TEST_CASE("device list parsing") {
  const auto d = admin::parse_device_list("p1:smartphone,t:tablet");
  REQUIRE(d.size() == 2);
  CHECK(d[1].device_type == DeviceType::kTablet);
  CHECK(admin::parse_device_list("-").empty());
  CHECK_THROWS_AS(admin::parse_device_list("p1"), IamError);
  CHECK_THROWS_AS(admin::parse_device_list("p1:watch"), IamError);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"port": 9000, "session_ttl_seconds": 60, "sensitive_mode_scope": "session",
                                  "pin_digest": "sha512", "run_seed": 5, "data_root": "/srv/iam"})");
  CHECK(c.port == 9000);
  CHECK(c.engine.session_ttl_seconds == 60);
  CHECK(c.engine.sensitive_mode_scope == SensitiveModeScope::kSession);
  CHECK(c.engine.pin_digest == PinDigest::kSha512);
  CHECK(c.run_seed == 5u);
  CHECK(c.data_root == "/srv/iam");
  CHECK(parse_config("{}").port == 8080);
  CHECK_THROWS_AS(parse_config(R"({"prot": 1})"), IamError);
  CHECK_THROWS_AS(parse_config(R"({"port": "x"})"), IamError);
  CHECK_THROWS_AS(parse_config(R"({"capture_noise": 0.9})"), IamError);
  CHECK_THROWS_AS(parse_config(R"({"sensitive_mode_scope": "forever"})"), IamError);
  CHECK_THROWS_AS(parse_config("not json"), IamError);
}

TEST_CASE("config path falls back to the environment") {
  const auto dir = scratch("cfg");
  std::ofstream(dir / "a.json") << R"({"port": 1111})";
  std::ofstream(dir / "b.json") << R"({"port": 2222})";
  ::setenv(kConfigEnvVar, (dir / "b.json").c_str(), 1);
  CHECK(resolve_config(dir / "a.json").port == 1111);
  CHECK(resolve_config(std::nullopt).port == 2222);
  ::unsetenv(kConfigEnvVar);
  CHECK(resolve_config(std::nullopt).port == 8080);
  fs::remove_all(dir);
}

TEST_CASE("iamctl exit codes") {
  const std::string bin = IAMCTL_PATH;
  const auto dir = scratch("cli");
  const std::string root = " --data-root " + (dir / "data").string();
  std::string out;

  CHECK(run(bin + " eval-rates --n 100 --p 0.1 --tau 0.25 --trials 10000 --seed 7", &out) == 0);
  CHECK(out == "far=0.000000 frr=0.000000 trials=10000\n");
  CHECK(run(bin + root + " logs", &out) == 0);
  CHECK(out.empty());
  CHECK(run(bin + root + " enroll --user-id alice --pin 4821 --devices p1:smartphone --template-seed 7", &out) == 0);
  CHECK(out == "enrolled user_id=alice face_ref=face-00000001 fingerprint_refs=p1:fp-00000001\n");
  CHECK(run(bin + root + " enroll --user-id alice --pin 4821") == 1);
  CHECK(run(bin + root + " classify --service-id funds-transfer --sensitivity A2") == 0);
  CHECK(run(bin + root + " classify --service-id funds-transfer --sensitivity A1", &out) == 1);
  CHECK(out.find("MONOTONICITY_VIOLATION") != std::string::npos);
  CHECK(run(bin + root + " unlock --user-id alice") == 0);

  CHECK(run(bin) == 2);
  CHECK(run(bin + " frobnicate") == 2);
  CHECK(run(bin + root + " classify --service-id x --sensitivity A9") == 2);
  CHECK(run(bin + root + " enroll --pin 1234") == 2);
  CHECK(run(bin + root + " logs --from yesterday") == 2);
  CHECK(run(bin + " eval-rates --n notanumber") == 2);
  fs::remove_all(dir);
  fs::remove("iamctl.out");
}
