#pragma once

// Credential verifiers. PINs are compared as salted digests; fingerprints and
// faces are simulated as 256-bit templates matched by normalized Hamming
// distance against an inclusive threshold.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "iam/domain.hpp"

namespace iam {

inline constexpr double kDefaultFingerprintThreshold = 0.25;
inline constexpr double kDefaultFaceThreshold = 0.30;
inline constexpr double kDefaultCaptureNoise = 0.1;

inline constexpr std::size_t kMinPinDigits = 4;
inline constexpr std::size_t kMaxPinDigits = 8;
inline constexpr std::size_t kMinSaltBytes = 16;

enum class PinDigest { kSha256, kSha512 };

std::string_view to_string(PinDigest d);
std::optional<PinDigest> parse_pin_digest(std::string_view s);

bool is_well_formed_pin(std::string_view pin);

// Hex digest of salt || pin. Throws kMalformedPin for anything other than
// 4-8 ASCII digits and kInvalidArgument for a salt shorter than 16 bytes.
std::string hash_pin(std::string_view pin, std::span<const std::uint8_t> salt,
                     PinDigest digest = PinDigest::kSha256);

// Constant-time comparison against the stored digest. A malformed
// candidate is simply a non-match. Throws kUserLocked for a locked record.
bool verify_pin(std::string_view candidate, const UserRecord& record,
                PinDigest digest = PinDigest::kSha256);

// 256 independent uniform bits from mt19937_64(seed): four draws, the first
// draw filling bits 0-63 most-significant first.
BiometricTemplate generate_template(std::uint64_t seed, TemplateKind kind);

// Flips bit i (i = 0..255, in order) when the i-th draw of mt19937_64(seed),
// mapped to [0, 1) by its top 53 bits, is below noise_rate.
// Throws kInvalidNoiseRate outside [0, 0.5].
BiometricTemplate capture_sample(const BiometricTemplate& enrolled, double noise_rate,
                                 std::uint64_t seed);

struct MatchResult {
  double distance = 0.0;
  double threshold = 0.0;
  bool matched = false;
  std::size_t differing_bits = 0;
};

// distance = popcount(probe XOR enrolled) / 256; matched iff distance <= threshold.
// Throws kKindMismatch across kinds and kInvalidThreshold outside [0, 1].
MatchResult match_templates(const BiometricTemplate& probe, const BiometricTemplate& enrolled,
                            double threshold);

}  // namespace iam
