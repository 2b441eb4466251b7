#include "iam/knowledge_base.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "iam/error.hpp"

namespace iam {

namespace {

std::string numbered(const char* prefix, std::size_t n) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s-%08zu", prefix, n);
  return buf;
}

std::size_t numbered_suffix(const std::string& id, std::string_view prefix) {
  if (id.size() <= prefix.size() + 1 || id.compare(0, prefix.size(), prefix) != 0) return 0;
  std::size_t v = 0;
  for (std::size_t i = prefix.size() + 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return 0;
    v = v * 10 + static_cast<std::size_t>(id[i] - '0');
  }
  return v;
}

[[noreturn]] void integrity(const std::string& what) {
  throw IamError(ErrorCode::kIntegrityViolation, "dangling reference: " + what);
}

bool matches(const UserLogEntry& e, const LogFilter& f) {
  if (f.user_id && e.user_id != *f.user_id) return false;
  if (f.session_id && e.session_id != *f.session_id) return false;
  if (f.event && e.event != *f.event) return false;
  if (f.from && e.timestamp < *f.from) return false;
  if (f.to && e.timestamp > *f.to) return false;
  return true;
}

}  // namespace

std::string StoreLocation::to_string() const {
  return kind == Kind::kCloudKb ? std::string("cloud_kb") : "device_local:" + device_id;
}

std::string kb_paths::device_fingerprints(const std::string& device_id) {
  return "devices/" + device_id + "/fingerprints.tsv";
}

bool is_valid_device_id(std::string_view id) {
  if (id.empty() || id == "." || id == ".." || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '_' || c == '-';
  });
}

KnowledgeBase::KnowledgeBase(Storage& storage) : storage_(storage) { load(); }

void KnowledgeBase::load() {
  auto rows = [&](const std::string& path) {
    auto content = storage_.read(path);
    return content ? tsv::parse(*content) : std::vector<std::vector<std::string>>{};
  };

  for (const auto& f : rows(kb_paths::kFaces)) {
    auto row = tsv::decode_template(f);
    templates_.emplace(TemplateKey{row.location, row.ref}, row);
    ++face_count_;
  }
  const std::string prefix = "devices/";
  const std::string suffix = "/fingerprints.tsv";
  for (const auto& path : storage_.list()) {
    if (!path.starts_with(prefix) || !path.ends_with(suffix)) continue;
    for (const auto& f : rows(path)) {
      auto row = tsv::decode_template(f);
      templates_.emplace(TemplateKey{row.location, row.ref}, row);
      ++fingerprint_count_;
    }
  }
  for (const auto& f : rows(kb_paths::kUsers)) {
    auto u = tsv::decode_user(f);
    users_[u.user_id] = std::move(u);
  }
  for (const auto& f : rows(kb_paths::kServices)) {
    auto s = tsv::decode_service(f);
    services_[s.service_id] = std::move(s);
  }
  for (const auto& f : rows(kb_paths::kOverlays)) {
    auto o = tsv::decode_overlay(f);
    overlays_.emplace(o.user_id, o.service_id);
  }
  for (const auto& f : rows(kb_paths::kUserLogs)) {
    auto e = tsv::decode_log_entry(f);
    if (!e.session_id.empty()) session_owner_.emplace(e.session_id, e.user_id);
    logs_.push_back(std::move(e));
  }
  std::size_t max_tx = 0;
  for (const auto& f : rows(kb_paths::kTransactions)) {
    auto tx = tsv::decode_transaction(f);
    max_tx = std::max(max_tx, numbered_suffix(tx.transaction_id, "tx"));
    transaction_index_[tx.transaction_id] = transactions_.size();
    transactions_.push_back(std::move(tx));
  }
  transaction_counter_ = std::max(max_tx, transactions_.size());
}

// ---------------------------------------------------------------------------
// user-details

const UserRecord& KnowledgeBase::user_locked(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw IamError(ErrorCode::kUnknownUser, "unknown user " + user_id);
  return it->second;
}

void KnowledgeBase::validate_user_locked(const UserRecord& user) const {
  if (user.user_id.empty()) throw IamError(ErrorCode::kInvalidArgument, "user_id is empty");
  auto owned = [&](const StoreLocation& loc, const std::string& ref, TemplateKind kind) {
    auto it = templates_.find(TemplateKey{loc.to_string(), ref});
    return it != templates_.end() && it->second.owner_user_id == user.user_id &&
           it->second.bits.kind() == kind;
  };
  if (user.status == UserStatus::kActive || !user.face_template_ref.empty()) {
    if (!owned(StoreLocation::cloud(), user.face_template_ref, TemplateKind::kFace)) {
      integrity("face template " + user.face_template_ref);
    }
  }
  std::set<std::string> seen;
  for (const auto& d : user.enrolled_devices) {
    if (!is_valid_device_id(d.device_id)) {
      throw IamError(ErrorCode::kInvalidArgument, "invalid device id " + d.device_id);
    }
    if (!seen.insert(d.device_id).second) {
      throw IamError(ErrorCode::kInvalidArgument, "device listed twice: " + d.device_id);
    }
    if (!d.fingerprint_template_ref) continue;
    if (!supports_fingerprint(d.device_type)) {
      throw IamError(ErrorCode::kDeviceMethodViolation,
                     std::string(to_string(d.device_type)) + " cannot carry a fingerprint");
    }
    if (!owned(StoreLocation::device(d.device_id), *d.fingerprint_template_ref,
               TemplateKind::kFingerprint)) {
      integrity("fingerprint template " + *d.fingerprint_template_ref);
    }
  }
}

std::string KnowledgeBase::users_file_locked() const {
  std::string out;
  for (const auto& [_, u] : users_) out += tsv::encode(u);
  return out;
}

void KnowledgeBase::insert_user(const UserRecord& user) {
  std::unique_lock lock(mutex_);
  if (users_.contains(user.user_id)) {
    throw IamError(ErrorCode::kDuplicateUser, "user already enrolled: " + user.user_id);
  }
  validate_user_locked(user);
  users_[user.user_id] = user;
  try {
    FileWrite w{kb_paths::kUsers, users_file_locked(), FileWrite::Mode::kReplace};
    storage_.apply({&w, 1});
  } catch (...) {
    users_.erase(user.user_id);
    throw;
  }
}

void KnowledgeBase::upsert_user(const UserRecord& user) {
  std::unique_lock lock(mutex_);
  validate_user_locked(user);
  auto previous = users_.find(user.user_id) == users_.end()
                      ? std::nullopt
                      : std::optional<UserRecord>(users_[user.user_id]);
  users_[user.user_id] = user;
  try {
    FileWrite w{kb_paths::kUsers, users_file_locked(), FileWrite::Mode::kReplace};
    storage_.apply({&w, 1});
  } catch (...) {
    if (previous) users_[user.user_id] = *previous; else users_.erase(user.user_id);
    throw;
  }
}

UserRecord KnowledgeBase::get_user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  return user_locked(user_id);
}

std::optional<UserRecord> KnowledgeBase::find_user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

std::vector<UserRecord> KnowledgeBase::users() const {
  std::shared_lock lock(mutex_);
  std::vector<UserRecord> out;
  for (const auto& [_, u] : users_) out.push_back(u);
  return out;
}

void KnowledgeBase::set_status(const std::string& user_id, UserStatus status) {
  KbBatch batch;
  batch.add(SetUserStatus{user_id, status});
  commit(batch);
}

void KnowledgeBase::lock_user(const std::string& user_id) { set_status(user_id, UserStatus::kLocked); }
void KnowledgeBase::unlock_user(const std::string& user_id) { set_status(user_id, UserStatus::kActive); }

// ---------------------------------------------------------------------------
// bank-services

const ServiceDefinition& KnowledgeBase::service_locked(const std::string& service_id) const {
  auto it = services_.find(service_id);
  if (it == services_.end()) {
    throw IamError(ErrorCode::kUnknownService, "unknown service " + service_id);
  }
  return it->second;
}

std::string KnowledgeBase::services_file_locked() const {
  std::string out;
  for (const auto& [_, s] : services_) out += tsv::encode(s);
  return out;
}

ServiceDefinition KnowledgeBase::upsert_service(const ServiceDefinition& service) {
  std::unique_lock lock(mutex_);
  if (service.service_id.empty()) throw IamError(ErrorCode::kInvalidArgument, "service_id is empty");
  ServiceDefinition bank = service;
  bank.classified_by = ClassifiedBy::kBank;
  bank.owner_user_id.reset();

  auto it = services_.find(bank.service_id);
  std::optional<ServiceDefinition> previous;
  if (it != services_.end()) {
    if (it->second.sensitivity == Sensitivity::kA2 && bank.sensitivity == Sensitivity::kA1) {
      throw IamError(ErrorCode::kMonotonicityViolation,
                     "service " + bank.service_id + " is A2 and cannot be downgraded to A1");
    }
    previous = it->second;
  }
  services_[bank.service_id] = bank;
  try {
    FileWrite w{kb_paths::kServices, services_file_locked(), FileWrite::Mode::kReplace};
    storage_.apply({&w, 1});
  } catch (...) {
    if (previous) services_[bank.service_id] = *previous; else services_.erase(bank.service_id);
    throw;
  }
  return bank;
}

ServiceDefinition KnowledgeBase::get_service(const std::string& service_id) const {
  std::shared_lock lock(mutex_);
  return service_locked(service_id);
}

std::vector<ServiceDefinition> KnowledgeBase::list_services() const {
  std::shared_lock lock(mutex_);
  std::vector<ServiceDefinition> out;
  for (const auto& [_, s] : services_) out.push_back(s);
  return out;
}

Sensitivity KnowledgeBase::resolve_locked(const std::string& user_id,
                                          const std::string& service_id) const {
  const auto& s = service_locked(service_id);
  const Sensitivity overlay =
      overlays_.contains({user_id, service_id}) ? Sensitivity::kA2 : Sensitivity::kA1;
  return max_sensitivity(s.sensitivity, overlay);
}

Sensitivity KnowledgeBase::resolve_sensitivity(const std::string& user_id,
                                               const std::string& service_id) const {
  std::shared_lock lock(mutex_);
  user_locked(user_id);
  return resolve_locked(user_id, service_id);
}

ServiceDefinition KnowledgeBase::service_for(const std::string& user_id,
                                             const std::string& service_id) const {
  std::shared_lock lock(mutex_);
  ServiceDefinition s = service_locked(service_id);
  if (s.sensitivity == Sensitivity::kA1 && overlays_.contains({user_id, service_id})) {
    s.sensitivity = Sensitivity::kA2;
    s.classified_by = ClassifiedBy::kUser;
    s.owner_user_id = user_id;
  }
  return s;
}

std::vector<ServiceDefinition> KnowledgeBase::services_for(const std::string& user_id) const {
  std::vector<ServiceDefinition> out;
  for (const auto& s : list_services()) out.push_back(service_for(user_id, s.service_id));
  return out;
}

ServiceDefinition KnowledgeBase::upgrade_service(const std::string& user_id,
                                                 const std::string& service_id, Instant at) {
  KbBatch batch;
  batch.add(ServiceUpgrade{user_id, service_id, at});
  commit(batch);
  return service_for(user_id, service_id);
}

// ---------------------------------------------------------------------------
// template stores

std::string KnowledgeBase::store_template(const BiometricTemplate& bits,
                                          const std::string& owner_user_id,
                                          const StoreLocation& location) {
  const bool cloud = location.kind == StoreLocation::Kind::kCloudKb;
  if (bits.kind() == TemplateKind::kFingerprint && cloud) {
    throw IamError(ErrorCode::kPartitionViolation, "fingerprint templates never leave the device");
  }
  if (bits.kind() == TemplateKind::kFace && !cloud) {
    throw IamError(ErrorCode::kPartitionViolation, "face templates live in the cloud store only");
  }
  if (!cloud && !is_valid_device_id(location.device_id)) {
    throw IamError(ErrorCode::kInvalidArgument, "invalid device id " + location.device_id);
  }

  std::unique_lock lock(mutex_);
  const std::size_t n = cloud ? face_count_ + 1 : fingerprint_count_ + 1;
  tsv::TemplateRow row{numbered(cloud ? "face" : "fp", n), owner_user_id, location.to_string(), bits};
  FileWrite w{cloud ? std::string(kb_paths::kFaces) : kb_paths::device_fingerprints(location.device_id),
              tsv::encode(row), FileWrite::Mode::kAppend};
  storage_.apply({&w, 1});
  (cloud ? face_count_ : fingerprint_count_) = n;
  templates_.emplace(TemplateKey{row.location, row.ref}, row);
  return row.ref;
}

BiometricTemplate KnowledgeBase::fetch_template(const std::string& ref,
                                                const StoreLocation& location) const {
  std::shared_lock lock(mutex_);
  auto it = templates_.find(TemplateKey{location.to_string(), ref});
  if (it != templates_.end()) return it->second.bits;
  for (const auto& [key, _] : templates_) {
    if (key.ref == ref) {
      throw IamError(ErrorCode::kPartitionViolation,
                     "template " + ref + " is not held in " + location.to_string());
    }
  }
  throw IamError(ErrorCode::kNotFound, "no template " + ref);
}

// ---------------------------------------------------------------------------
// user-logs and transactions

std::string KnowledgeBase::append_log(const UserLogEntry& entry) {
  KbBatch batch;
  batch.add(entry);
  return commit(batch).log_entry_ids.front();
}

std::vector<UserLogEntry> KnowledgeBase::query_logs(const LogFilter& filter) const {
  std::shared_lock lock(mutex_);
  std::vector<UserLogEntry> out;
  for (const auto& e : logs_) {
    if (matches(e, filter)) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const UserLogEntry& a, const UserLogEntry& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::size_t KnowledgeBase::log_count() const {
  std::shared_lock lock(mutex_);
  return logs_.size();
}

std::string KnowledgeBase::next_transaction_id() {
  return numbered("tx", ++transaction_counter_);
}

std::string KnowledgeBase::record_transaction(const TransactionRecord& tx) {
  KbBatch batch;
  batch.add(tx);
  return commit(batch).transaction_ids.front();
}

std::optional<TransactionRecord> KnowledgeBase::find_transaction(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = transaction_index_.find(id);
  if (it == transaction_index_.end()) return std::nullopt;
  return transactions_[it->second];
}

std::vector<TransactionRecord> KnowledgeBase::list_transactions(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  std::vector<TransactionRecord> out;
  for (const auto& tx : transactions_) {
    if (tx.user_id == user_id) out.push_back(tx);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.executed_at < b.executed_at;
  });
  return out;
}

std::vector<TransactionRecord> KnowledgeBase::all_transactions() const {
  std::shared_lock lock(mutex_);
  return transactions_;
}

// ---------------------------------------------------------------------------

CommitReceipt KnowledgeBase::commit(const KbBatch& batch) {
  std::unique_lock lock(mutex_);

  // Validate every mutation against current state plus earlier mutations of
  // the same batch; nothing is written unless all of them pass.
  std::vector<UserLogEntry> new_logs;
  std::vector<TransactionRecord> new_txs;
  std::map<std::string, std::string> new_sessions;
  std::map<std::string, UserStatus> new_status;
  std::vector<ServiceUpgrade> new_upgrades;
  std::set<std::pair<std::string, std::string>> pending_overlays;
  CommitReceipt receipt;

  auto session_owner = [&](const std::string& session_id) -> const std::string* {
    if (auto it = new_sessions.find(session_id); it != new_sessions.end()) return &it->second;
    if (auto it = session_owner_.find(session_id); it != session_owner_.end()) return &it->second;
    return nullptr;
  };

  for (const auto& mutation : batch.mutations) {
    if (const auto* entry = std::get_if<UserLogEntry>(&mutation)) {
      if (!users_.contains(entry->user_id)) integrity("user " + entry->user_id);
      validate_log_entry(*entry);
      if (!entry->session_id.empty()) {
        const std::string* owner = session_owner(entry->session_id);
        if (owner && *owner != entry->user_id) integrity("session " + entry->session_id);
        new_sessions.emplace(entry->session_id, entry->user_id);
      }
      UserLogEntry stored = *entry;
      stored.entry_id = numbered("log", logs_.size() + new_logs.size() + 1);
      receipt.log_entry_ids.push_back(stored.entry_id);
      new_logs.push_back(std::move(stored));
    } else if (const auto* tx = std::get_if<TransactionRecord>(&mutation)) {
      if (!users_.contains(tx->user_id)) integrity("user " + tx->user_id);
      if (!services_.contains(tx->service_id)) integrity("service " + tx->service_id);
      const std::string* owner = session_owner(tx->session_id);
      if (!owner || *owner != tx->user_id) integrity("session " + tx->session_id);
      TransactionRecord stored = *tx;
      if (stored.transaction_id.empty()) stored.transaction_id = next_transaction_id();
      const bool duplicate =
          transaction_index_.contains(stored.transaction_id) ||
          std::any_of(new_txs.begin(), new_txs.end(),
                      [&](const auto& t) { return t.transaction_id == stored.transaction_id; });
      if (duplicate) {
        throw IamError(ErrorCode::kIntegrityViolation,
                       "duplicate transaction id " + stored.transaction_id);
      }
      receipt.transaction_ids.push_back(stored.transaction_id);
      new_txs.push_back(std::move(stored));
    } else if (const auto* st = std::get_if<SetUserStatus>(&mutation)) {
      user_locked(st->user_id);
      new_status[st->user_id] = st->status;
    } else if (const auto* up = std::get_if<ServiceUpgrade>(&mutation)) {
      user_locked(up->user_id);
      const Sensitivity current = resolve_locked(up->user_id, up->service_id);
      if (current == Sensitivity::kA2 || pending_overlays.contains({up->user_id, up->service_id})) {
        throw IamError(ErrorCode::kAlreadyA2, "service " + up->service_id + " already requires A2");
      }
      pending_overlays.emplace(up->user_id, up->service_id);
      new_upgrades.push_back(*up);
    }
  }

  std::vector<FileWrite> writes;
  auto append = [&](const char* path, std::string content) {
    if (!content.empty()) writes.push_back({path, std::move(content), FileWrite::Mode::kAppend});
  };
  {
    std::string s;
    for (const auto& e : new_logs) s += tsv::encode(e);
    append(kb_paths::kUserLogs, std::move(s));
  }
  {
    std::string s;
    for (const auto& t : new_txs) s += tsv::encode(t);
    append(kb_paths::kTransactions, std::move(s));
  }
  {
    std::string s;
    for (const auto& u : new_upgrades) s += tsv::encode_overlay(u.user_id, u.service_id, u.at);
    append(kb_paths::kOverlays, std::move(s));
  }
  std::map<std::string, UserStatus> previous_status;
  for (const auto& [id, status] : new_status) {
    previous_status[id] = users_[id].status;
    users_[id].status = status;
  }
  if (!new_status.empty()) {
    writes.push_back({kb_paths::kUsers, users_file_locked(), FileWrite::Mode::kReplace});
  }

  try {
    if (!writes.empty()) storage_.apply(writes);
  } catch (...) {
    for (const auto& [id, status] : previous_status) users_[id].status = status;
    throw;
  }

  for (auto& e : new_logs) logs_.push_back(std::move(e));
  for (auto& t : new_txs) {
    transaction_index_[t.transaction_id] = transactions_.size();
    transactions_.push_back(std::move(t));
  }
  for (auto& [session, owner] : new_sessions) session_owner_.emplace(session, owner);
  for (const auto& o : pending_overlays) overlays_.insert(o);
  return receipt;
}

}  // namespace iam
