#include "iam/error_rates.hpp"

#include <cstdio>
#include <random>
#include <vector>

#include "iam/authenticators.hpp"
#include "iam/error.hpp"
#include "iam/random.hpp"

namespace iam {

ErrorRates evaluate_error_rates(const ErrorRateParams& params) {
  const std::size_t n = params.population_size;
  if (n < 2) throw IamError(ErrorCode::kInvalidArgument, "population must hold at least 2 users");
  if (params.trials < 1) throw IamError(ErrorCode::kInvalidArgument, "trials must be positive");
  if (!(params.noise_rate >= 0.0 && params.noise_rate <= 0.5)) {
    throw IamError(ErrorCode::kInvalidNoiseRate, "noise rate must lie in [0, 0.5]");
  }
  if (!(params.threshold >= 0.0 && params.threshold <= 1.0)) {
    throw IamError(ErrorCode::kInvalidThreshold, "threshold must lie in [0, 1]");
  }

  std::mt19937_64 enroll_rng(derive_seed(params.seed, SeedPurpose::kEvalEnrollment));
  std::vector<BiometricTemplate> enrolled;
  enrolled.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    enrolled.push_back(generate_template(enroll_rng(), params.kind));
  }

  ErrorRates rates;
  rates.trials = params.trials;
  rates.threshold = params.threshold;
  rates.noise_rate = params.noise_rate;

  std::mt19937_64 genuine_rng(derive_seed(params.seed, SeedPurpose::kEvalGenuine));
  for (std::size_t t = 0; t < params.trials; ++t) {
    const std::size_t u = genuine_rng() % n;
    const std::uint64_t s = genuine_rng();
    const auto probe = capture_sample(enrolled[u], params.noise_rate, s);
    if (!match_templates(probe, enrolled[u], params.threshold).matched) ++rates.false_rejects;
  }

  std::mt19937_64 impostor_rng(derive_seed(params.seed, SeedPurpose::kEvalImpostor));
  for (std::size_t t = 0; t < params.trials; ++t) {
    const std::size_t i = impostor_rng() % n;
    std::size_t j = impostor_rng() % (n - 1);
    if (j >= i) ++j;
    const std::uint64_t s = impostor_rng();
    const auto probe = capture_sample(enrolled[i], params.noise_rate, s);
    if (match_templates(probe, enrolled[j], params.threshold).matched) ++rates.false_accepts;
  }

  const auto trials = static_cast<double>(params.trials);
  rates.far = static_cast<double>(rates.false_accepts) / trials;
  rates.frr = static_cast<double>(rates.false_rejects) / trials;
  return rates;
}

std::string format_error_rates(const ErrorRates& rates) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "far=%.6f frr=%.6f trials=%zu", rates.far, rates.frr, rates.trials);
  return buf;
}

}  // namespace iam
