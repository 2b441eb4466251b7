#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "doctest.h"
#include "iam/error.hpp"
#include "iam/storage.hpp"
#include "iam/tsv.hpp"

using namespace iam;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("iam-storage-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

}  // namespace

TEST_CASE("tsv escaping round-trips awkward text") {
  for (std::string s : {"", "plain", "tab\there", "line\nbreak", "cr\rx", "back\\slash", "\\t literal", "-"}) {
    CHECK(tsv::unescape(tsv::escape(s)) == s);
    CHECK(tsv::escape(s).find('\t') == std::string::npos);
    CHECK(tsv::escape(s).find('\n') == std::string::npos);
  }
  const auto rows = tsv::parse(tsv::join({"a\tb", "c"}) + "\n" + tsv::join({"x"}) + "\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a\tb", "c"});
  CHECK(rows[1] == std::vector<std::string>{"x"});
}

TEST_CASE("records round-trip through their row form") {
  UserLogEntry e;
  e.entry_id = "log-00000001";
  e.session_id = "s-1";
  e.user_id = "alice";
  e.event = LogEvent::kA2Granted;
  e.device_type = DeviceType::kTablet;
  e.geolocation = Geolocation::declared(-33.8688, 151.2093);
  e.auth_method_used = AuthMethod::kFace;
  e.timestamp = *parse_rfc3339("2026-03-01T09:30:00Z");
  e.detail = "service_id=x;note=a\tb";
  const auto rows = tsv::parse(tsv::encode(e));
  REQUIRE(rows.size() == 1);
  CHECK(tsv::decode_log_entry(rows[0]) == e);

  TransactionRecord tx{"tx-00000001", "s-1", "alice", "funds-transfer", Amount{12550}, e.timestamp, Sensitivity::kA2};
  CHECK(tsv::decode_transaction(tsv::parse(tsv::encode(tx))[0]) == tx);
  tx.amount.reset();
  CHECK(tsv::decode_transaction(tsv::parse(tsv::encode(tx))[0]) == tx);

  UserRecord u{"alice", "Alice\tNg", "ab", "cd", "face-1", {{"p1", DeviceType::kSmartphone, "fp-1"}, {"pc", DeviceType::kDesktop, std::nullopt}}, UserStatus::kLocked};
  CHECK(tsv::decode_user(tsv::parse(tsv::encode(u))[0]) == u);

  ServiceDefinition s{"bill-pay", "Bill payment", Sensitivity::kA1, ClassifiedBy::kBank, std::nullopt};
  CHECK(tsv::decode_service(tsv::parse(tsv::encode(s))[0]) == s);
}

TEST_CASE("malformed rows are rejected") {
  CHECK_THROWS_AS(tsv::decode_service({"a", "b"}), IamError);
  CHECK_THROWS_AS(tsv::decode_service({"a", "b", "A3", "bank"}), IamError);
  CHECK_THROWS_AS(tsv::decode_transaction({"tx", "yesterday", "s", "u", "svc", "A1", "-"}), IamError);
}

TEST_CASE("memory storage appends and replaces") {
  MemoryStorage m;
  std::vector<FileWrite> w = {{"kb/a.tsv", "1\n"}, {"kb/a.tsv", "2\n"}, {"kb/b.tsv", "x\n", FileWrite::Mode::kReplace}};
  m.apply(w);
  CHECK(m.read("kb/a.tsv") == "1\n2\n");
  std::vector<FileWrite> r = {{"kb/b.tsv", "y\n", FileWrite::Mode::kReplace}};
  m.apply(r);
  CHECK(m.read("kb/b.tsv") == "y\n");
  CHECK_FALSE(m.read("kb/c.tsv"));
  CHECK(m.list() == std::vector<std::string>{"kb/a.tsv", "kb/b.tsv"});
}

TEST_CASE("directory storage persists the same bytes") {
  TempDir dir;
  {
    DirectoryStorage d(dir.path);
    std::vector<FileWrite> w = {{"kb/a.tsv", "1\n"}, {"devices/p1/fingerprints.tsv", "f\n"}};
    d.apply(w);
    std::vector<FileWrite> w2 = {{"kb/a.tsv", "2\n"}, {"kb/users.tsv", "u\n", FileWrite::Mode::kReplace}};
    d.apply(w2);
  }
  DirectoryStorage again(dir.path);
  CHECK(again.read("kb/a.tsv") == "1\n2\n");
  CHECK(again.read("devices/p1/fingerprints.tsv") == "f\n");
  CHECK(again.list() == std::vector<std::string>{"devices/p1/fingerprints.tsv", "kb/a.tsv", "kb/users.tsv"});
  std::ifstream raw(dir.path / "kb" / "users.tsv");
  std::string line;
  std::getline(raw, line);
  CHECK(line == "u");
}

TEST_CASE("directory storage refuses paths that escape the root") {
  TempDir dir;
  DirectoryStorage d(dir.path);
  std::vector<FileWrite> w = {{"../evil.tsv", "x"}};
  CHECK_THROWS_AS(d.apply(w), IamError);
  std::vector<FileWrite> abs = {{"/tmp/evil.tsv", "x"}};
  CHECK_THROWS_AS(d.apply(abs), IamError);
}
