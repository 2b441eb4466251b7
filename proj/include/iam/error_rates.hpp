#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "iam/domain.hpp"

namespace iam {

struct ErrorRateParams {
  std::size_t population_size = 100;
  double noise_rate = 0.1;
  double threshold = 0.25;
  std::size_t trials = 10000;
  std::uint64_t seed = 7;
  TemplateKind kind = TemplateKind::kFingerprint;
};

struct ErrorRates {
  double far = 0.0;
  double frr = 0.0;
  std::size_t trials = 0;
  double threshold = 0.0;
  double noise_rate = 0.0;
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;
};

// Monte Carlo FAR/FRR over a simulated population.
//
// Trial schedule (fixed; part of the documented seed derivation):
//   enrollment: E = mt19937_64(seed ^ kEvalEnrollment); user u gets
//               generate_template(E(), kind) for u = 0..n-1 in order.
//   genuine:    G = mt19937_64(seed ^ kEvalGenuine); per trial
//               u = G() % n, s = G(); a capture_sample(enrolled[u], p, s)
//               that fails to match enrolled[u] is a false reject.
//   impostor:   M = mt19937_64(seed ^ kEvalImpostor); per trial
//               i = M() % n, j = M() % (n - 1), j += (j >= i), s = M();
//               a capture_sample(enrolled[i], p, s) that matches
//               enrolled[j] is a false accept.
//
// Throws kInvalidArgument for n < 2 or trials < 1, kInvalidNoiseRate and
// kInvalidThreshold for out-of-range p and threshold.
ErrorRates evaluate_error_rates(const ErrorRateParams& params);

// "far=0.000000 frr=0.000000 trials=10000"
std::string format_error_rates(const ErrorRates& rates);

}  // namespace iam
