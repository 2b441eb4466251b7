#pragma once

// Line codecs for the knowledge-base files. One record per line, fields
// separated by TAB, UTF-8. Backslash, TAB, CR and LF inside a field are
// written as \\, \t, \r and \n. Absent optional values are written as "-".
// Column orders are listed in docs/kb_schema.md.

#include <string>
#include <string_view>
#include <vector>

#include "iam/domain.hpp"

namespace iam::tsv {

std::string escape(std::string_view field);
std::string unescape(std::string_view field);

// Escapes every field and terminates the line with '\n'.
std::string join(const std::vector<std::string>& fields);
// Splits file content into records of unescaped fields; blank lines skipped.
std::vector<std::vector<std::string>> parse(std::string_view content);

struct TemplateRow {
  std::string ref;
  std::string owner_user_id;
  std::string location;  // "cloud_kb" or "device_local:<device_id>"
  BiometricTemplate bits;
};

std::string encode(const UserRecord& user);
std::string encode(const ServiceDefinition& service);
std::string encode(const TransactionRecord& tx);
std::string encode(const UserLogEntry& entry);
std::string encode(const TemplateRow& row);
std::string encode_overlay(const std::string& user_id, const std::string& service_id, Instant at);

// Each throws IamError(kMalformedRecord) on a bad column count or value.
UserRecord decode_user(const std::vector<std::string>& f);
ServiceDefinition decode_service(const std::vector<std::string>& f);
TransactionRecord decode_transaction(const std::vector<std::string>& f);
UserLogEntry decode_log_entry(const std::vector<std::string>& f);
TemplateRow decode_template(const std::vector<std::string>& f);

struct OverlayRow {
  std::string user_id;
  std::string service_id;
  Instant upgraded_at{};
};
OverlayRow decode_overlay(const std::vector<std::string>& f);

}  // namespace iam::tsv
