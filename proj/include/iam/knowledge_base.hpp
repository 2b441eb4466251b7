#pragma once

// The internet-banking knowledge base: user-details, bank-services (plus the
// per-user upgrade overlay), transactions and user-logs, together with the
// cloud face store and one fingerprint store per device.
//
// Storage partition: fingerprint templates are only ever written to a
// device_local store and face templates only to cloud_kb. PIN material is
// held as salted digests; raw PINs never reach this layer.

#include <atomic>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "iam/domain.hpp"
#include "iam/storage.hpp"
#include "iam/tsv.hpp"

namespace iam {

struct StoreLocation {
  enum class Kind { kCloudKb, kDeviceLocal };

  Kind kind = Kind::kCloudKb;
  std::string device_id;  // non-empty iff kind == kDeviceLocal

  static StoreLocation cloud() { return {}; }
  static StoreLocation device(std::string id) { return {Kind::kDeviceLocal, std::move(id)}; }

  // "cloud_kb" or "device_local:<device_id>"
  std::string to_string() const;

  friend bool operator==(const StoreLocation&, const StoreLocation&) = default;
};

struct LogFilter {
  std::optional<std::string> user_id;
  std::optional<std::string> session_id;
  std::optional<LogEvent> event;
  std::optional<Instant> from;  // inclusive
  std::optional<Instant> to;    // inclusive
};

struct SetUserStatus {
  std::string user_id;
  UserStatus status = UserStatus::kActive;
};

struct ServiceUpgrade {
  std::string user_id;
  std::string service_id;
  Instant at{};
};

using KbMutation = std::variant<UserLogEntry, TransactionRecord, SetUserStatus, ServiceUpgrade>;

// Mutations committed all-or-nothing, validated in order (a transaction may
// reference a session first named by a log entry earlier in the batch).
struct KbBatch {
  std::vector<KbMutation> mutations;

  KbBatch& add(KbMutation m) {
    mutations.push_back(std::move(m));
    return *this;
  }
  bool empty() const { return mutations.empty(); }
};

struct CommitReceipt {
  std::vector<std::string> log_entry_ids;
  std::vector<std::string> transaction_ids;
};

// Canonical file paths.
namespace kb_paths {
inline constexpr const char* kUsers = "kb/users.tsv";
inline constexpr const char* kServices = "kb/services.tsv";
inline constexpr const char* kOverlays = "kb/overlays.tsv";
inline constexpr const char* kTransactions = "kb/transactions.tsv";
inline constexpr const char* kUserLogs = "kb/user_logs.tsv";
inline constexpr const char* kFaces = "kb/faces.tsv";
std::string device_fingerprints(const std::string& device_id);
}  // namespace kb_paths

// Device ids become directory names: [A-Za-z0-9._-]+, not "." or "..".
bool is_valid_device_id(std::string_view id);

class KnowledgeBase {
 public:
  // Replays whatever the storage already holds. Throws kMalformedRecord on
  // a corrupt file.
  explicit KnowledgeBase(Storage& storage);

  KnowledgeBase(const KnowledgeBase&) = delete;
  KnowledgeBase& operator=(const KnowledgeBase&) = delete;

  // --- user-details ---------------------------------------------------------
  // kDuplicateUser if present. Both insert and upsert check that the face
  // ref and every fingerprint ref resolve to templates owned by this user
  // (kIntegrityViolation) and that only handheld devices carry one.
  void insert_user(const UserRecord& user);
  void upsert_user(const UserRecord& user);
  UserRecord get_user(const std::string& user_id) const;  // kUnknownUser
  std::optional<UserRecord> find_user(const std::string& user_id) const;
  std::vector<UserRecord> users() const;
  void lock_user(const std::string& user_id);
  void unlock_user(const std::string& user_id);

  // --- bank-services --------------------------------------------------------
  // Bank-level classification. Re-classifying a bank-A2 service as A1 is
  // kMonotonicityViolation.
  ServiceDefinition upsert_service(const ServiceDefinition& service);
  ServiceDefinition get_service(const std::string& service_id) const;  // bank view
  std::vector<ServiceDefinition> list_services() const;
  // The user's view: bank classification raised by that user's overlay.
  ServiceDefinition service_for(const std::string& user_id, const std::string& service_id) const;
  std::vector<ServiceDefinition> services_for(const std::string& user_id) const;
  // max(bank, overlay) under A1 < A2.
  Sensitivity resolve_sensitivity(const std::string& user_id, const std::string& service_id) const;

  // --- template stores ------------------------------------------------------
  // kPartitionViolation for fingerprint->cloud_kb or face->device_local.
  std::string store_template(const BiometricTemplate& bits, const std::string& owner_user_id,
                             const StoreLocation& location);
  // kNotFound for an unknown ref; kPartitionViolation when the ref lives in
  // a different store than the one asked for.
  BiometricTemplate fetch_template(const std::string& ref, const StoreLocation& location) const;

  // --- user-logs ------------------------------------------------------------
  std::string append_log(const UserLogEntry& entry);
  // Timestamp order; ties keep insertion order.
  std::vector<UserLogEntry> query_logs(const LogFilter& filter = {}) const;
  std::size_t log_count() const;

  // --- transactions ---------------------------------------------------------
  // Assigns an id when tx.transaction_id is empty. kIntegrityViolation names
  // the dangling user, service or session.
  std::string record_transaction(const TransactionRecord& tx);
  std::optional<TransactionRecord> find_transaction(const std::string& transaction_id) const;
  // executed_at order; ties keep insertion order.
  std::vector<TransactionRecord> list_transactions(const std::string& user_id) const;
  std::vector<TransactionRecord> all_transactions() const;
  std::string next_transaction_id();

  // --- atomic commit --------------------------------------------------------
  CommitReceipt commit(const KbBatch& batch);

  // kAlreadyA2 when the user's view is already A2; kUnknownService /
  // kUnknownUser otherwise.
  ServiceDefinition upgrade_service(const std::string& user_id, const std::string& service_id,
                                    Instant at);

 private:
  struct TemplateKey {
    std::string location;
    std::string ref;
    auto operator<=>(const TemplateKey&) const = default;
  };

  void load();
  void validate_user_locked(const UserRecord& user) const;
  const UserRecord& user_locked(const std::string& user_id) const;
  const ServiceDefinition& service_locked(const std::string& service_id) const;
  Sensitivity resolve_locked(const std::string& user_id, const std::string& service_id) const;
  std::string users_file_locked() const;
  std::string services_file_locked() const;
  void set_status(const std::string& user_id, UserStatus status);

  Storage& storage_;
  mutable std::shared_mutex mutex_;

  std::map<std::string, UserRecord> users_;
  std::map<std::string, ServiceDefinition> services_;
  std::set<std::pair<std::string, std::string>> overlays_;
  std::vector<TransactionRecord> transactions_;
  std::map<std::string, std::size_t> transaction_index_;
  std::vector<UserLogEntry> logs_;
  std::map<std::string, std::string> session_owner_;
  std::map<TemplateKey, tsv::TemplateRow> templates_;
  std::size_t face_count_ = 0;
  std::size_t fingerprint_count_ = 0;
  std::atomic<std::size_t> transaction_counter_{0};
};

}  // namespace iam
