#pragma once

// Seeded generators for the randomised suites.  Every law produced here has
// minimal span 1 and stays clear of the ill-conditioned band of nonzero
// means below 1e-6, where the root at 1 nearly collides with its mirror.

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "whlab/lattice.hpp"

namespace testsupport {

// Two-sided walk with down reach in [1, max_down] and up reach in
// [1, max_up].  The extreme points always carry mass so the reaches are
// exact; interior points join with probability ~1/2.  Weights are bounded
// away from zero, which keeps the ensemble away from degenerate corners.
inline whlab::StepLaw random_span1_law(std::mt19937_64& rng, int max_down,
                                       int max_up) {
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (;;) {
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_down));
    const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_up));
    std::map<int, double> pmf;
    pmf[-m] = weight(rng);
    pmf[n] = weight(rng);
    for (int k = -m + 1; k < n; ++k) {
      if (coin(rng) < 0.5) pmf[k] = weight(rng);
    }
    pmf.erase(0);
    if (coin(rng) < 0.3) pmf[0] = weight(rng);

    double total = 0.0;
    for (const auto& [k, v] : pmf) total += v;
    for (auto& [k, v] : pmf) v /= total;

    int span = 0;
    for (const auto& [k, v] : pmf) {
      if (k != 0) span = std::gcd(span, std::abs(k));
    }
    if (span != 1) continue;

    whlab::StepLaw law(pmf);
    const double mu = law.mean();
    if (mu != 0.0 && std::abs(mu) < 1e-6) continue;
    return law;
  }
}

}  // namespace testsupport
