#include "iam/tsv.hpp"

#include <charconv>
#include <cstdio>

#include "iam/error.hpp"

namespace iam::tsv {

namespace {

constexpr std::string_view kAbsent = "-";

[[noreturn]] void malformed(const std::string& what) {
  throw IamError(ErrorCode::kMalformedRecord, "malformed record: " + what);
}

void expect_columns(const std::vector<std::string>& f, std::size_t n, const char* table) {
  if (f.size() != n) {
    malformed(std::string(table) + " expects " + std::to_string(n) + " columns, got " +
              std::to_string(f.size()));
  }
}

template <typename T>
T require(std::optional<T> v, const char* what) {
  if (!v) malformed(what);
  return *v;
}

std::string opt(const std::optional<std::string>& v) { return v ? *v : std::string(kAbsent); }

std::optional<std::string> opt_field(const std::string& s) {
  if (s == kAbsent) return std::nullopt;
  return s;
}

Instant instant(const std::string& s) { return require(parse_rfc3339(s), "timestamp"); }

std::string coordinate(std::optional<double> v) {
  if (!v) return std::string(kAbsent);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::optional<double> parse_coordinate(const std::string& s) {
  if (s == kAbsent) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) malformed("coordinate");
  return v;
}

}  // namespace

std::string escape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\' || i + 1 == field.size()) {
      out.push_back(field[i]);
      continue;
    }
    switch (field[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(field[i]);
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back('\t');
    line += escape(fields[i]);
  }
  line.push_back('\n');
  return line;
}

std::vector<std::vector<std::string>> parse(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t fs = 0;
    while (true) {
      std::size_t tab = line.find('\t', fs);
      fields.push_back(unescape(line.substr(fs, tab == std::string_view::npos ? line.npos : tab - fs)));
      if (tab == std::string_view::npos) break;
      fs = tab + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// users: user_id full_name status pin_digest pin_salt face_template_ref devices
// devices: comma-joined device_id:device_type:fingerprint_ref (ref "-" if none)

std::string encode(const UserRecord& user) {
  std::string devices;
  for (const auto& d : user.enrolled_devices) {
    if (!devices.empty()) devices.push_back(',');
    devices += d.device_id + ":" + std::string(to_string(d.device_type)) + ":" +
               opt(d.fingerprint_template_ref);
  }
  if (devices.empty()) devices = kAbsent;
  return join({user.user_id, user.full_name, std::string(to_string(user.status)), user.pin_digest,
               user.pin_salt, user.face_template_ref, devices});
}

UserRecord decode_user(const std::vector<std::string>& f) {
  expect_columns(f, 7, "users");
  UserRecord u;
  u.user_id = f[0];
  u.full_name = f[1];
  u.status = require(parse_user_status(f[2]), "user status");
  u.pin_digest = f[3];
  u.pin_salt = f[4];
  u.face_template_ref = f[5];
  if (f[6] != kAbsent) {
    std::string_view rest = f[6];
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      rest = comma == rest.npos ? std::string_view{} : rest.substr(comma + 1);

      auto c1 = item.find(':');
      auto c2 = item.find(':', c1 == item.npos ? item.npos : c1 + 1);
      if (c1 == item.npos || c2 == item.npos) malformed("device binding");
      DeviceBinding d;
      d.device_id = std::string(item.substr(0, c1));
      d.device_type = require(parse_device_type(item.substr(c1 + 1, c2 - c1 - 1)), "device type");
      d.fingerprint_template_ref = opt_field(std::string(item.substr(c2 + 1)));
      u.enrolled_devices.push_back(std::move(d));
    }
  }
  return u;
}

// services: service_id name sensitivity classified_by

std::string encode(const ServiceDefinition& s) {
  return join({s.service_id, s.name, std::string(to_string(s.sensitivity)),
               std::string(to_string(s.classified_by))});
}

ServiceDefinition decode_service(const std::vector<std::string>& f) {
  expect_columns(f, 4, "services");
  ServiceDefinition s;
  s.service_id = f[0];
  s.name = f[1];
  s.sensitivity = require(parse_sensitivity(f[2]), "sensitivity");
  s.classified_by = require(parse_classified_by(f[3]), "classified_by");
  return s;
}

// overlays: user_id service_id sensitivity upgraded_at

std::string encode_overlay(const std::string& user_id, const std::string& service_id, Instant at) {
  return join({user_id, service_id, "A2", format_rfc3339(at)});
}

OverlayRow decode_overlay(const std::vector<std::string>& f) {
  expect_columns(f, 4, "overlays");
  if (f[2] != "A2") malformed("overlay sensitivity");
  return OverlayRow{f[0], f[1], instant(f[3])};
}

// transactions: transaction_id executed_at session_id user_id service_id required_level amount

std::string encode(const TransactionRecord& tx) {
  return join({tx.transaction_id, format_rfc3339(tx.executed_at), tx.session_id, tx.user_id,
               tx.service_id, std::string(to_string(tx.required_level)),
               tx.amount ? tx.amount->to_string() : std::string(kAbsent)});
}

TransactionRecord decode_transaction(const std::vector<std::string>& f) {
  expect_columns(f, 7, "transactions");
  TransactionRecord tx;
  tx.transaction_id = f[0];
  tx.executed_at = instant(f[1]);
  tx.session_id = f[2];
  tx.user_id = f[3];
  tx.service_id = f[4];
  tx.required_level = require(parse_sensitivity(f[5]), "required level");
  if (f[6] != kAbsent) tx.amount = require(Amount::parse(f[6]), "amount");
  return tx;
}

// user_logs: entry_id timestamp session_id user_id event device_type
//            auth_method geo_source latitude longitude detail

std::string encode(const UserLogEntry& e) {
  return join({e.entry_id, format_rfc3339(e.timestamp),
               e.session_id.empty() ? std::string(kAbsent) : e.session_id, e.user_id,
               std::string(to_string(e.event)), std::string(to_string(e.device_type)),
               std::string(to_string(e.auth_method_used)),
               std::string(to_string(e.geolocation.source)), coordinate(e.geolocation.latitude),
               coordinate(e.geolocation.longitude), e.detail});
}

UserLogEntry decode_log_entry(const std::vector<std::string>& f) {
  expect_columns(f, 11, "user_logs");
  UserLogEntry e;
  e.entry_id = f[0];
  e.timestamp = instant(f[1]);
  e.session_id = f[2] == kAbsent ? std::string{} : f[2];
  e.user_id = f[3];
  e.event = require(parse_log_event(f[4]), "log event");
  e.device_type = require(parse_device_type(f[5]), "device type");
  e.auth_method_used = require(parse_auth_method(f[6]), "auth method");
  e.geolocation.source = require(parse_geo_source(f[7]), "geo source");
  e.geolocation.latitude = parse_coordinate(f[8]);
  e.geolocation.longitude = parse_coordinate(f[9]);
  e.detail = f[10];
  return e;
}

// faces / fingerprints: template_ref owner_user_id kind location bits_hex

std::string encode(const TemplateRow& row) {
  return join({row.ref, row.owner_user_id, std::string(to_string(row.bits.kind())), row.location,
               row.bits.to_hex()});
}

TemplateRow decode_template(const std::vector<std::string>& f) {
  expect_columns(f, 5, "templates");
  const TemplateKind kind = require(parse_template_kind(f[2]), "template kind");
  return TemplateRow{f[0], f[1], f[3], BiometricTemplate::from_hex(kind, f[4])};
}

}  // namespace iam::tsv
