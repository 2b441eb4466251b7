#include "iam/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <utility>

#include "iam/error.hpp"
#include "iam/hex.hpp"

namespace iam {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

template <typename E, std::size_t N>
std::string_view name_in(const NameTable<E, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> parse_in(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [v, name] : table) {
    if (name == s) return v;
  }
  return std::nullopt;
}

constexpr NameTable<DeviceType, 4> kDeviceTypes{{
    {DeviceType::kSmartphone, "smartphone"},
    {DeviceType::kTablet, "tablet"},
    {DeviceType::kDesktop, "desktop"},
    {DeviceType::kLaptop, "laptop"},
}};
constexpr NameTable<UserStatus, 2> kUserStatuses{{
    {UserStatus::kActive, "active"},
    {UserStatus::kLocked, "locked"},
}};
constexpr NameTable<Sensitivity, 2> kSensitivities{{
    {Sensitivity::kA1, "A1"},
    {Sensitivity::kA2, "A2"},
}};
constexpr NameTable<ClassifiedBy, 2> kClassifiers{{
    {ClassifiedBy::kBank, "bank"},
    {ClassifiedBy::kUser, "user"},
}};
constexpr NameTable<A1Method, 3> kA1Methods{{
    {A1Method::kNone, "none"},
    {A1Method::kPin, "pin"},
    {A1Method::kFingerprint, "fingerprint"},
}};
constexpr NameTable<AuthMethod, 4> kAuthMethods{{
    {AuthMethod::kNone, "none"},
    {AuthMethod::kPin, "pin"},
    {AuthMethod::kFingerprint, "fingerprint"},
    {AuthMethod::kFace, "face"},
}};
constexpr NameTable<TemplateKind, 2> kTemplateKinds{{
    {TemplateKind::kFingerprint, "fingerprint"},
    {TemplateKind::kFace, "face"},
}};
constexpr NameTable<GeoSource, 2> kGeoSources{{
    {GeoSource::kClientDeclared, "client_declared"},
    {GeoSource::kUnknown, "unknown"},
}};
constexpr NameTable<LogEvent, 10> kLogEvents{{
    {LogEvent::kA1Granted, "a1_granted"},
    {LogEvent::kA1Denied, "a1_denied"},
    {LogEvent::kA2Granted, "a2_granted"},
    {LogEvent::kA2Denied, "a2_denied"},
    {LogEvent::kLogout, "logout"},
    {LogEvent::kTimeout, "timeout"},
    {LogEvent::kLockout, "lockout"},
    {LogEvent::kServiceUpgraded, "service_upgraded"},
    {LogEvent::kTxExecuted, "tx_executed"},
    {LogEvent::kTxRefused, "tx_refused"},
}};
constexpr NameTable<SensitiveModeScope, 2> kScopes{{
    {SensitiveModeScope::kSingleTransaction, "single_transaction"},
    {SensitiveModeScope::kSession, "session"},
}};

}  // namespace

std::string_view to_string(DeviceType v) { return name_in(kDeviceTypes, v); }
std::string_view to_string(UserStatus v) { return name_in(kUserStatuses, v); }
std::string_view to_string(Sensitivity v) { return name_in(kSensitivities, v); }
std::string_view to_string(ClassifiedBy v) { return name_in(kClassifiers, v); }
std::string_view to_string(A1Method v) { return name_in(kA1Methods, v); }
std::string_view to_string(AuthMethod v) { return name_in(kAuthMethods, v); }
std::string_view to_string(TemplateKind v) { return name_in(kTemplateKinds, v); }
std::string_view to_string(GeoSource v) { return name_in(kGeoSources, v); }
std::string_view to_string(LogEvent v) { return name_in(kLogEvents, v); }
std::string_view to_string(SensitiveModeScope v) { return name_in(kScopes, v); }

std::optional<DeviceType> parse_device_type(std::string_view s) { return parse_in(kDeviceTypes, s); }
std::optional<UserStatus> parse_user_status(std::string_view s) { return parse_in(kUserStatuses, s); }
std::optional<Sensitivity> parse_sensitivity(std::string_view s) { return parse_in(kSensitivities, s); }
std::optional<ClassifiedBy> parse_classified_by(std::string_view s) { return parse_in(kClassifiers, s); }
std::optional<A1Method> parse_a1_method(std::string_view s) { return parse_in(kA1Methods, s); }
std::optional<AuthMethod> parse_auth_method(std::string_view s) { return parse_in(kAuthMethods, s); }
std::optional<TemplateKind> parse_template_kind(std::string_view s) { return parse_in(kTemplateKinds, s); }
std::optional<GeoSource> parse_geo_source(std::string_view s) { return parse_in(kGeoSources, s); }
std::optional<LogEvent> parse_log_event(std::string_view s) { return parse_in(kLogEvents, s); }
std::optional<SensitiveModeScope> parse_sensitive_mode_scope(std::string_view s) {
  return parse_in(kScopes, s);
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidFlagPair: return "INVALID_FLAG_PAIR";
    case ErrorCode::kMalformedPin: return "MALFORMED_PIN";
    case ErrorCode::kUserLocked: return "USER_LOCKED";
    case ErrorCode::kUnknownUser: return "UNKNOWN_USER";
    case ErrorCode::kUnknownDevice: return "UNKNOWN_DEVICE";
    case ErrorCode::kUnknownService: return "UNKNOWN_SERVICE";
    case ErrorCode::kUnknownSession: return "UNKNOWN_SESSION";
    case ErrorCode::kDeviceMethodViolation: return "DEVICE_METHOD_VIOLATION";
    case ErrorCode::kInvalidNoiseRate: return "INVALID_NOISE_RATE";
    case ErrorCode::kInvalidThreshold: return "INVALID_THRESHOLD";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kKindMismatch: return "KIND_MISMATCH";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kSessionExpired: return "SESSION_EXPIRED";
    case ErrorCode::kNotAuthenticated: return "NOT_AUTHENTICATED";
    case ErrorCode::kChallengePending: return "CHALLENGE_PENDING";
    case ErrorCode::kChallengeExpired: return "CHALLENGE_EXPIRED";
    case ErrorCode::kChallengeConsumed: return "CHALLENGE_CONSUMED";
    case ErrorCode::kChallengeMismatch: return "CHALLENGE_MISMATCH";
    case ErrorCode::kAlreadyA2: return "ALREADY_A2";
    case ErrorCode::kMonotonicityViolation: return "MONOTONICITY_VIOLATION";
    case ErrorCode::kPartitionViolation: return "PARTITION_VIOLATION";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kIntegrityViolation: return "INTEGRITY_VIOLATION";
    case ErrorCode::kDuplicateUser: return "DUPLICATE_USER";
    case ErrorCode::kMalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::kStorageFailure: return "STORAGE_FAILURE";
  }
  return "INTERNAL";
}

// ---------------------------------------------------------------------------

SessionStatus classify_status(bool a1, bool a2) {
  if (!a1 && a2) {
    throw IamError(ErrorCode::kInvalidFlagPair, "a2 set without a1");
  }
  if (!a1) return SessionStatus::offline();
  return a2 ? SessionStatus::sensitive() : SessionStatus::online();
}

std::string_view status_code(StatusLabel label) {
  switch (label) {
    case StatusLabel::kOffline: return "S-1";
    case StatusLabel::kOnline: return "S-2";
    case StatusLabel::kSensitive: return "S-3";
  }
  return "S-1";
}

std::optional<StatusLabel> parse_status_code(std::string_view code) {
  if (code == "S-1") return StatusLabel::kOffline;
  if (code == "S-2") return StatusLabel::kOnline;
  if (code == "S-3") return StatusLabel::kSensitive;
  return std::nullopt;
}

std::string_view status_description(StatusLabel label) {
  switch (label) {
    case StatusLabel::kOffline: return "User is Offline";
    case StatusLabel::kOnline: return "User is Online";
    case StatusLabel::kSensitive: return "User is Online and in Sensitive Mode";
  }
  return "";
}

// ---------------------------------------------------------------------------

bool BiometricTemplate::bit(std::size_t index) const {
  return ((words_[index / 64] >> (63 - index % 64)) & 1u) != 0;
}

std::string BiometricTemplate::to_hex() const {
  std::array<std::uint8_t, kTemplateBits / 8> bytes{};
  for (std::size_t w = 0; w < words_.size(); ++w) {
    for (std::size_t b = 0; b < 8; ++b) {
      bytes[w * 8 + b] = static_cast<std::uint8_t>(words_[w] >> (56 - 8 * b));
    }
  }
  return iam::to_hex(bytes);
}

BiometricTemplate BiometricTemplate::from_hex(TemplateKind kind, std::string_view hex) {
  if (hex.size() != kTemplateHexChars) {
    throw IamError(ErrorCode::kLengthMismatch,
                   "template must be " + std::to_string(kTemplateHexChars) + " hex digits");
  }
  Words words{};
  for (std::size_t i = 0; i < hex.size(); ++i) {
    auto v = hex_digit_value(hex[i]);
    if (!v) throw IamError(ErrorCode::kMalformedRecord, "template contains a non-hex digit");
    words[i / 16] = (words[i / 16] << 4) | static_cast<std::uint64_t>(*v);
  }
  return BiometricTemplate{kind, words};
}

// ---------------------------------------------------------------------------

Geolocation Geolocation::declared(double latitude, double longitude) {
  if (!(latitude >= -90.0 && latitude <= 90.0) || !(longitude >= -180.0 && longitude <= 180.0)) {
    throw IamError(ErrorCode::kInvalidArgument, "geolocation out of range");
  }
  return Geolocation{latitude, longitude, GeoSource::kClientDeclared};
}

std::optional<Amount> Amount::parse(std::string_view text) {
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 2 || (dot != std::string_view::npos && frac.empty())) {
    return std::nullopt;
  }
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac) || whole.size() > 15) return std::nullopt;

  std::int64_t units = 0;
  std::from_chars(whole.data(), whole.data() + whole.size(), units);
  std::int64_t cents = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    cents = cents * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  }
  return Amount{units * 100 + cents};
}

std::string Amount::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(minor_units / 100),
                static_cast<long long>(minor_units % 100));
  return buf;
}

const DeviceBinding* UserRecord::find_device(std::string_view device_id) const {
  auto it = std::find_if(enrolled_devices.begin(), enrolled_devices.end(),
                         [&](const DeviceBinding& d) { return d.device_id == device_id; });
  return it == enrolled_devices.end() ? nullptr : &*it;
}

void validate_log_entry(const UserLogEntry& entry) {
  if (entry.event == LogEvent::kA1Granted && entry.auth_method_used != AuthMethod::kPin &&
      entry.auth_method_used != AuthMethod::kFingerprint) {
    throw IamError(ErrorCode::kInvalidArgument, "a1_granted must record pin or fingerprint");
  }
  if (entry.event == LogEvent::kA2Granted && entry.auth_method_used != AuthMethod::kFace) {
    throw IamError(ErrorCode::kInvalidArgument, "a2_granted must record face");
  }
}

// ---------------------------------------------------------------------------

std::string format_rfc3339(Instant t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<Instant> parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || p != text.data() + pos + len) return std::nullopt;
    return v;
  };
  auto y = field(0, 4), mo = field(5, 2), d = field(8, 2);
  auto h = field(11, 2), mi = field(14, 2), s = field(17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 59) return std::nullopt;
  return sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*s};
}

}  // namespace iam
