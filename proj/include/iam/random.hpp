#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <random>
#include <span>
#include <string>

namespace iam {

// Per-purpose stream constants. A stream seed is run_seed XOR the constant;
// the values are part of the documented config reference (docs/config.md)
// so any implementation can replay the same schedules.
enum class SeedPurpose : std::uint64_t {
  kEvalEnrollment = 0x656e726f6c6c6d74ULL,  // "enrollmt"
  kEvalGenuine = 0x67656e75696e6521ULL,     // "genuine!"
  kEvalImpostor = 0x696d706f73746f72ULL,    // "impostor"
  kFaceTemplate = 0x666163652d746d70ULL,    // "face-tmp"
  kFingerprintTemplate = 0x66696e6765727072ULL,  // "fingerpr"
  kEngineIds = 0x656e67696e652d69ULL,       // "engine-i"
  kGatewayTokens = 0x676174657761792dULL,   // "gateway-"
  kEnrollmentSalts = 0x73616c74732d706eULL, // "salts-pn"
};

constexpr std::uint64_t derive_seed(std::uint64_t run_seed, SeedPurpose purpose) {
  return run_seed ^ static_cast<std::uint64_t>(purpose);
}

// Maps a 64-bit draw to a double in [0, 1) using its top 53 bits.
constexpr double unit_interval(std::uint64_t draw) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

// Source of identifiers, salts and challenge tokens.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  // `bytes` random bytes, hex encoded.
  std::string hex(std::size_t bytes);
};

// OpenSSL CSPRNG. Production default.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible stream for tests and replayable runs. Never use for
// deployments: its output is predictable from the seed.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

}  // namespace iam
