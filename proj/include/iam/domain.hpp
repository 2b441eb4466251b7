#pragma once

// Shared value types for the two-level authentication gateway: users and
// their device bindings, biometric templates, sessions and their Table-style
// status flags, bank services, transactions and the user log.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iam/clock.hpp"

namespace iam {

enum class DeviceType { kSmartphone, kTablet, kDesktop, kLaptop };
enum class UserStatus { kActive, kLocked };
enum class Sensitivity { kA1, kA2 };
enum class ClassifiedBy { kBank, kUser };
enum class A1Method { kNone, kPin, kFingerprint };
enum class AuthMethod { kNone, kPin, kFingerprint, kFace };
enum class TemplateKind { kFingerprint, kFace };
enum class GeoSource { kClientDeclared, kUnknown };
enum class StatusLabel { kOffline, kOnline, kSensitive };
enum class SensitiveModeScope { kSingleTransaction, kSession };

enum class LogEvent {
  kA1Granted,
  kA1Denied,
  kA2Granted,
  kA2Denied,
  kLogout,
  kTimeout,
  kLockout,
  kServiceUpgraded,
  kTxExecuted,
  kTxRefused,
};

// Wire names ("smartphone", "a1_granted", "A2", ...). parse_* returns
// nullopt for anything not in the table.
std::string_view to_string(DeviceType v);
std::string_view to_string(UserStatus v);
std::string_view to_string(Sensitivity v);
std::string_view to_string(ClassifiedBy v);
std::string_view to_string(A1Method v);
std::string_view to_string(AuthMethod v);
std::string_view to_string(TemplateKind v);
std::string_view to_string(GeoSource v);
std::string_view to_string(LogEvent v);
std::string_view to_string(SensitiveModeScope v);

std::optional<DeviceType> parse_device_type(std::string_view s);
std::optional<UserStatus> parse_user_status(std::string_view s);
std::optional<Sensitivity> parse_sensitivity(std::string_view s);
std::optional<ClassifiedBy> parse_classified_by(std::string_view s);
std::optional<A1Method> parse_a1_method(std::string_view s);
std::optional<AuthMethod> parse_auth_method(std::string_view s);
std::optional<TemplateKind> parse_template_kind(std::string_view s);
std::optional<GeoSource> parse_geo_source(std::string_view s);
std::optional<LogEvent> parse_log_event(std::string_view s);
std::optional<SensitiveModeScope> parse_sensitive_mode_scope(std::string_view s);

// Only handheld devices carry a fingerprint reader; desktops and laptops
// authenticate by PIN.
constexpr bool supports_fingerprint(DeviceType t) {
  return t == DeviceType::kSmartphone || t == DeviceType::kTablet;
}

constexpr AuthMethod to_auth_method(A1Method m) {
  switch (m) {
    case A1Method::kPin: return AuthMethod::kPin;
    case A1Method::kFingerprint: return AuthMethod::kFingerprint;
    case A1Method::kNone: break;
  }
  return AuthMethod::kNone;
}

// ---------------------------------------------------------------------------
// Session status
// ---------------------------------------------------------------------------

// One of the three legal (a1, a2) pairs. The pair (0, 1) has no constructor.
class SessionStatus {
 public:
  static constexpr SessionStatus offline() { return SessionStatus{StatusLabel::kOffline}; }
  static constexpr SessionStatus online() { return SessionStatus{StatusLabel::kOnline}; }
  static constexpr SessionStatus sensitive() { return SessionStatus{StatusLabel::kSensitive}; }

  constexpr bool a1() const { return label_ != StatusLabel::kOffline; }
  constexpr bool a2() const { return label_ == StatusLabel::kSensitive; }
  constexpr StatusLabel label() const { return label_; }

  friend constexpr bool operator==(SessionStatus, SessionStatus) = default;

 private:
  constexpr explicit SessionStatus(StatusLabel l) : label_(l) {}
  StatusLabel label_;
};

// Throws IamError(kInvalidFlagPair) for (false, true).
SessionStatus classify_status(bool a1, bool a2);

// "S-1" / "S-2" / "S-3".
std::string_view status_code(StatusLabel label);
std::optional<StatusLabel> parse_status_code(std::string_view code);
// "User is Offline" / "User is Online" / "User is Online and in Sensitive Mode".
std::string_view status_description(StatusLabel label);

// ---------------------------------------------------------------------------
// Biometric template
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTemplateBits = 256;
inline constexpr std::size_t kTemplateHexChars = kTemplateBits / 4;

// Simulated feature vector. Bit i lives in words[i / 64] at position
// 63 - (i % 64), so the hex form lists bits in index order.
class BiometricTemplate {
 public:
  using Words = std::array<std::uint64_t, kTemplateBits / 64>;

  BiometricTemplate(TemplateKind kind, const Words& words) : kind_(kind), words_(words) {}

  TemplateKind kind() const { return kind_; }
  const Words& words() const { return words_; }
  bool bit(std::size_t index) const;

  std::string to_hex() const;
  // kLengthMismatch unless exactly 64 hex digits; kMalformedRecord on a
  // non-hex character.
  static BiometricTemplate from_hex(TemplateKind kind, std::string_view hex);

  friend bool operator==(const BiometricTemplate&, const BiometricTemplate&) = default;

 private:
  TemplateKind kind_;
  Words words_;
};

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct Geolocation {
  std::optional<double> latitude;
  std::optional<double> longitude;
  GeoSource source = GeoSource::kUnknown;

  static Geolocation unknown() { return {}; }
  // kInvalidArgument when latitude is outside [-90, 90] or longitude
  // outside [-180, 180].
  static Geolocation declared(double latitude, double longitude);

  friend bool operator==(const Geolocation&, const Geolocation&) = default;
};

// Exact currency amount in minor units (cents). Text form is "123.45".
struct Amount {
  std::int64_t minor_units = 0;

  static std::optional<Amount> parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Amount&, const Amount&) = default;
};

struct DeviceBinding {
  std::string device_id;
  DeviceType device_type = DeviceType::kDesktop;
  std::optional<std::string> fingerprint_template_ref;

  friend bool operator==(const DeviceBinding&, const DeviceBinding&) = default;
};

struct UserRecord {
  std::string user_id;
  std::string full_name;
  std::string pin_digest;  // hex
  std::string pin_salt;    // hex
  std::string face_template_ref;
  std::vector<DeviceBinding> enrolled_devices;
  UserStatus status = UserStatus::kActive;

  const DeviceBinding* find_device(std::string_view device_id) const;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct ChallengeToken {
  std::string token;
  std::string service_id;
  Instant issued_at{};
  std::int64_t ttl_seconds = 0;
  bool consumed = false;

  bool expired_at(Instant now) const {
    return now > issued_at + std::chrono::seconds{ttl_seconds};
  }
};

struct Session {
  std::string session_id;
  std::string user_id;
  SessionStatus status = SessionStatus::offline();
  DeviceType device_type = DeviceType::kDesktop;
  A1Method a1_method = A1Method::kNone;
  std::optional<Instant> a1_timestamp;
  std::optional<Instant> a2_timestamp;
  Geolocation geolocation;
  Instant created_at{};
  Instant expires_at{};
  std::optional<ChallengeToken> pending_challenge;
};

struct ServiceDefinition {
  std::string service_id;
  std::string name;
  Sensitivity sensitivity = Sensitivity::kA1;
  ClassifiedBy classified_by = ClassifiedBy::kBank;
  std::optional<std::string> owner_user_id;  // set iff classified_by == kUser

  friend bool operator==(const ServiceDefinition&, const ServiceDefinition&) = default;
};

struct TransactionRecord {
  std::string transaction_id;
  std::string session_id;
  std::string user_id;
  std::string service_id;
  std::optional<Amount> amount;
  Instant executed_at{};
  Sensitivity required_level = Sensitivity::kA1;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

struct UserLogEntry {
  std::string entry_id;  // assigned by the knowledge base on append
  std::string session_id;
  std::string user_id;
  LogEvent event = LogEvent::kA1Granted;
  DeviceType device_type = DeviceType::kDesktop;
  Geolocation geolocation;
  AuthMethod auth_method_used = AuthMethod::kNone;
  Instant timestamp{};
  // Free-form key=value pairs, ';'-separated (transaction id, level,
  // status reversion).
  std::string detail;

  friend bool operator==(const UserLogEntry&, const UserLogEntry&) = default;
};

// kInvalidArgument when a granted event carries the wrong method
// (a1_granted needs pin or fingerprint, a2_granted needs face).
void validate_log_entry(const UserLogEntry& entry);

constexpr Sensitivity max_sensitivity(Sensitivity a, Sensitivity b) {
  return (a == Sensitivity::kA2 || b == Sensitivity::kA2) ? Sensitivity::kA2 : Sensitivity::kA1;
}

}  // namespace iam
