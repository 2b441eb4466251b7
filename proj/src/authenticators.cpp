#include "iam/authenticators.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <memory>
#include <random>
#include <vector>

#include "iam/error.hpp"
#include "iam/hex.hpp"
#include "iam/random.hpp"

namespace iam {

std::string_view to_string(PinDigest d) {
  return d == PinDigest::kSha512 ? "sha512" : "sha256";
}

std::optional<PinDigest> parse_pin_digest(std::string_view s) {
  if (s == "sha256") return PinDigest::kSha256;
  if (s == "sha512") return PinDigest::kSha512;
  return std::nullopt;
}

bool is_well_formed_pin(std::string_view pin) {
  return pin.size() >= kMinPinDigits && pin.size() <= kMaxPinDigits &&
         std::all_of(pin.begin(), pin.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string hash_pin(std::string_view pin, std::span<const std::uint8_t> salt, PinDigest digest) {
  if (!is_well_formed_pin(pin)) {
    throw IamError(ErrorCode::kMalformedPin, "PIN must be 4-8 digits");
  }
  if (salt.size() < kMinSaltBytes) {
    throw IamError(ErrorCode::kInvalidArgument, "PIN salt must be at least 16 bytes");
  }

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  const EVP_MD* md = digest == PinDigest::kSha512 ? EVP_sha512() : EVP_sha256();
  std::uint8_t out[EVP_MAX_MD_SIZE];
  unsigned int out_len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), salt.data(), salt.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), pin.data(), pin.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out, &out_len) != 1) {
    throw IamError(ErrorCode::kStorageFailure, "digest computation failed");
  }
  return to_hex(std::span<const std::uint8_t>(out, out_len));
}

bool verify_pin(std::string_view candidate, const UserRecord& record, PinDigest digest) {
  if (record.status == UserStatus::kLocked) {
    throw IamError(ErrorCode::kUserLocked, "user is locked");
  }
  if (!is_well_formed_pin(candidate)) return false;
  auto salt = from_hex(record.pin_salt);
  if (!salt) throw IamError(ErrorCode::kMalformedRecord, "stored PIN salt is not hex");

  const std::string computed = hash_pin(candidate, *salt, digest);
  if (computed.size() != record.pin_digest.size()) return false;
  return CRYPTO_memcmp(computed.data(), record.pin_digest.data(), computed.size()) == 0;
}

BiometricTemplate generate_template(std::uint64_t seed, TemplateKind kind) {
  std::mt19937_64 rng(seed);
  BiometricTemplate::Words words{};
  for (auto& w : words) w = rng();
  return BiometricTemplate{kind, words};
}

BiometricTemplate capture_sample(const BiometricTemplate& enrolled, double noise_rate,
                                 std::uint64_t seed) {
  if (!(noise_rate >= 0.0 && noise_rate <= 0.5)) {
    throw IamError(ErrorCode::kInvalidNoiseRate, "noise rate must lie in [0, 0.5]");
  }
  std::mt19937_64 rng(seed);
  BiometricTemplate::Words words = enrolled.words();
  for (std::size_t i = 0; i < kTemplateBits; ++i) {
    if (unit_interval(rng()) < noise_rate) {
      words[i / 64] ^= std::uint64_t{1} << (63 - i % 64);
    }
  }
  return BiometricTemplate{enrolled.kind(), words};
}

MatchResult match_templates(const BiometricTemplate& probe, const BiometricTemplate& enrolled,
                            double threshold) {
  if (probe.kind() != enrolled.kind()) {
    throw IamError(ErrorCode::kKindMismatch, "cannot match templates of different kinds");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw IamError(ErrorCode::kInvalidThreshold, "threshold must lie in [0, 1]");
  }
  std::size_t differing = 0;
  for (std::size_t w = 0; w < probe.words().size(); ++w) {
    differing += static_cast<std::size_t>(std::popcount(probe.words()[w] ^ enrolled.words()[w]));
  }
  MatchResult r;
  r.differing_bits = differing;
  r.distance = static_cast<double>(differing) / static_cast<double>(kTemplateBits);
  r.threshold = threshold;
  r.matched = r.distance <= threshold;
  return r;
}

}  // namespace iam
