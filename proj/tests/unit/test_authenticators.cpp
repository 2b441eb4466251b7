#include <random>

#include "doctest.h"
#include "iam/authenticators.hpp"
#include "iam/error.hpp"
#include "iam/hex.hpp"
#include "oracles.hpp"

using namespace iam;

namespace {

std::vector<std::uint8_t> salt(std::uint8_t fill) { return std::vector<std::uint8_t>(16, fill); }

double distance(const BiometricTemplate& a, const BiometricTemplate& b) {
  return match_templates(a, b, 1.0).distance;
}

}  // namespace

TEST_CASE("hash_pin is deterministic and salt dependent") {
  const auto a = salt(0xa5);
  CHECK(hash_pin("123456", a) == hash_pin("123456", a));
  CHECK(hash_pin("123456", a) != hash_pin("123457", a));
  CHECK(hash_pin("123456", a) != hash_pin("123456", salt(0x5a)));
  CHECK(hash_pin("123456", a).size() == 64);
  CHECK(hash_pin("123456", a, PinDigest::kSha512).size() == 128);
}

TEST_CASE("hash_pin matches digests computed outside OpenSSL") {
  // Python hashlib over salt || pin.
  CHECK(hash_pin("1234", salt(0)) == "e4ae0c82639990744974cc3495a82432d8c5366e5e5f1796b2f9a36ad12664b5");
  CHECK(hash_pin("482133", salt(7), PinDigest::kSha512) ==
        "744c13da20c723f77aa8066c850f5d6238598764bc71c84db540e22c63b837d0"
        "f5fc0aba3b18edcc299c61f6345a5639f7e3d4d114b4bbca6bea493fd876f277");
}

TEST_CASE("hash_pin rejects malformed PINs and short salts") {
  CHECK_THROWS_AS(hash_pin("12a4", salt(1)), IamError);
  CHECK_THROWS_AS(hash_pin("123", salt(1)), IamError);
  CHECK_THROWS_AS(hash_pin("123456789", salt(1)), IamError);
  try {
    hash_pin("12a4", salt(1));
  } catch (const IamError& e) {
    CHECK(e.code() == ErrorCode::kMalformedPin);
  }
  CHECK_THROWS_AS(hash_pin("1234", std::vector<std::uint8_t>(8, 1)), IamError);
}

TEST_CASE("verify_pin") {
  const auto s = salt(7);
  UserRecord u;
  u.user_id = "u";
  u.pin_salt = to_hex(s);
  u.pin_digest = hash_pin("482133", s);
  CHECK(verify_pin("482133", u));
  CHECK_FALSE(verify_pin("482134", u));
  CHECK_FALSE(verify_pin("48x133", u));
  CHECK_FALSE(verify_pin("482133", u, PinDigest::kSha512));
  u.status = UserStatus::kLocked;
  try {
    verify_pin("482133", u);
    FAIL("locked user verified");
  } catch (const IamError& e) {
    CHECK(e.code() == ErrorCode::kUserLocked);
  }
}

TEST_CASE("generate_template") {
  const auto a = generate_template(42, TemplateKind::kFingerprint);
  CHECK(a == generate_template(42, TemplateKind::kFingerprint));
  const double d = distance(a, generate_template(43, TemplateKind::kFingerprint));
  CHECK(d >= 0.40);
  CHECK(d <= 0.60);
  // Seed 0 is an ordinary seed.
  const auto z = generate_template(0, TemplateKind::kFace);
  CHECK(z.to_hex().size() == 64);
  CHECK(z.to_hex() == oracle::to_hex(oracle::template_bits(0)));
  CHECK(a.to_hex() == oracle::to_hex(oracle::template_bits(42)));
}

TEST_CASE("the [0.40, 0.60] band has small binomial mass outside it") {
  // 0.40 * 256 = 102.4, 0.60 * 256 = 153.6: inside means 103..153 bits.
  const long double outside = oracle::binomial_cdf(256, 102, 0.5L) + oracle::binomial_upper(256, 153, 0.5L);
  CHECK(outside < 0.002L);
  CHECK(outside > 0.0013L);
}

TEST_CASE("capture_sample") {
  const auto t = generate_template(9, TemplateKind::kFace);
  CHECK(capture_sample(t, 0.0, 1) == t);
  CHECK(distance(capture_sample(t, 0.0, 1), t) == 0.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const double d = distance(capture_sample(t, 0.1, seed), t);
    CHECK(d >= 0.04);
    CHECK(d <= 0.16);
  }
  // 0.04 * 256 = 10.24, 0.16 * 256 = 40.96: inside means 11..40 flips.
  const long double outside = oracle::binomial_cdf(256, 10, 0.1L) + oracle::binomial_upper(256, 40, 0.1L);
  CHECK(outside < 0.003L);

  CHECK_THROWS_AS(capture_sample(t, 0.6, 1), IamError);
  CHECK_THROWS_AS(capture_sample(t, -0.1, 1), IamError);
  CHECK_NOTHROW(capture_sample(t, 0.5, 1));

  // Same flips as the bitset reference.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(capture_sample(t, 0.3, seed).to_hex() == oracle::to_hex(oracle::noisy(oracle::template_bits(9), 0.3, seed)));
  }
}

TEST_CASE("match_templates examples") {
  const auto t = generate_template(5, TemplateKind::kFingerprint);
  auto same = match_templates(t, t, 0.25);
  CHECK(same.distance == 0.0);
  CHECK(same.matched);

  auto w = t.words();
  for (auto& x : w) x = ~x;
  auto opposite = match_templates(BiometricTemplate{t.kind(), w}, t, 0.25);
  CHECK(opposite.distance == 1.0);
  CHECK_FALSE(opposite.matched);

  // Exactly 64 flipped bits sits on the inclusive boundary.
  w = t.words();
  w[1] = ~w[1];
  auto edge = match_templates(BiometricTemplate{t.kind(), w}, t, 0.25);
  CHECK(edge.differing_bits == 64);
  CHECK(edge.distance == 0.25);
  CHECK(edge.matched);
  w[2] ^= 1;
  CHECK_FALSE(match_templates(BiometricTemplate{t.kind(), w}, t, 0.25).matched);
}

TEST_CASE("match_templates errors") {
  const auto f = generate_template(1, TemplateKind::kFingerprint);
  const auto g = generate_template(1, TemplateKind::kFace);
  CHECK_THROWS_AS(match_templates(f, g, 0.25), IamError);
  CHECK_THROWS_AS(match_templates(f, f, 1.5), IamError);
  CHECK_THROWS_AS(match_templates(f, f, -0.01), IamError);
}

TEST_CASE("distance is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(2718);
  for (int i = 0; i < 1000; ++i) {
    const auto a = generate_template(rng(), TemplateKind::kFace);
    const auto b = capture_sample(a, 0.2, rng());
    const auto c = i % 2 ? generate_template(rng(), TemplateKind::kFace) : capture_sample(b, 0.1, rng());
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c));
  }
}

TEST_CASE("matched is monotone in the threshold") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto a = generate_template(rng(), TemplateKind::kFace);
    const auto b = capture_sample(a, 0.3, rng());
    bool previous = false;
    for (int k = 0; k <= 256; ++k) {
      const bool m = match_templates(b, a, k / 256.0).matched;
      CHECK((!previous || m));
      previous = m;
    }
    CHECK(previous);
  }
}
