#include "iam/random.hpp"

#include <openssl/rand.h>

#include <vector>

#include "iam/error.hpp"
#include "iam/hex.hpp"

namespace iam {

std::string RandomSource::hex(std::size_t bytes) {
  std::vector<std::uint8_t> buf(bytes);
  fill(buf);
  return to_hex(buf);
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw IamError(ErrorCode::kStorageFailure, "RAND_bytes failed");
  }
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mutex_);
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t draw = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(draw >> (56 - 8 * b));
    }
  }
}

}  // namespace iam
