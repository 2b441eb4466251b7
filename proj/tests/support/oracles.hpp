#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the matcher; the bit handling goes through std::bitset so an
// off-by-one in word packing would show up as a disagreement.

#include <bitset>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Bits = std::bitset<256>;

// log C(n, k) via lgamma, long double.
inline long double log_choose(int n, int k) {
  return std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
         std::lgamma(static_cast<long double>(n - k) + 1);
}

inline long double binomial_pmf(int n, int k, long double p) {
  if (p == 0) return k == 0 ? 1 : 0;
  if (p == 1) return k == n ? 1 : 0;
  return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

// P(X <= k), X ~ Bin(n, p).
inline long double binomial_cdf(int n, int k, long double p) {
  long double sum = 0;
  for (int i = 0; i <= k && i <= n; ++i) sum += binomial_pmf(n, i, p);
  return sum;
}

// P(X > k).
inline long double binomial_upper(int n, int k, long double p) {
  long double sum = 0;
  for (int i = k + 1; i <= n; ++i) sum += binomial_pmf(n, i, p);
  return sum;
}

// Bit i of the template is bit i of the concatenated big-endian draws.
inline Bits template_bits(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bits out;
  for (int w = 0; w < 4; ++w) {
    const std::uint64_t draw = rng();
    for (int b = 0; b < 64; ++b) out[w * 64 + b] = (draw >> (63 - b)) & 1u;
  }
  return out;
}

inline Bits noisy(const Bits& in, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bits out = in;
  for (int i = 0; i < 256; ++i) {
    const double u = std::ldexp(static_cast<double>(rng() >> 11), -53);
    if (u < p) out.flip(i);
  }
  return out;
}

inline bool within(const Bits& a, const Bits& b, double tau) {
  return static_cast<double>((a ^ b).count()) / 256.0 <= tau;
}

struct Counts {
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;
};

// Replays the documented trial schedule from scratch.
inline Counts brute_force_rates(std::size_t n, double p, double tau, std::size_t trials,
                                std::uint64_t seed, std::uint64_t enroll_salt,
                                std::uint64_t genuine_salt, std::uint64_t impostor_salt) {
  std::mt19937_64 e(seed ^ enroll_salt);
  std::vector<Bits> pop;
  for (std::size_t u = 0; u < n; ++u) pop.push_back(template_bits(e()));

  Counts c;
  std::mt19937_64 g(seed ^ genuine_salt);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto u = g() % n;
    const auto s = g();
    if (!within(noisy(pop[u], p, s), pop[u], tau)) ++c.false_rejects;
  }
  std::mt19937_64 m(seed ^ impostor_salt);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto i = m() % n;
    auto j = m() % (n - 1);
    if (j >= i) ++j;
    const auto s = m();
    if (within(noisy(pop[i], p, s), pop[j], tau)) ++c.false_accepts;
  }
  return c;
}

inline std::string to_hex(const Bits& b) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 256; i += 4) {
    const int nib = (b[i] << 3) | (b[i + 1] << 2) | (b[i + 2] << 1) | b[i + 3];
    out += digits[nib];
  }
  return out;
}

}  // namespace oracle
