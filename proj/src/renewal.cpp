#include "whlab/renewal.hpp"

#include <algorithm>
#include <cmath>

namespace whlab {

RenewalSequence renewal_sequence(const DefectiveLaw& ladder, int truncation) {
  if (truncation < 0)
    throw parameter_error("renewal: truncation must be >= 0");
  if (truncation > kMaxLatticePoint)
    throw parameter_error("renewal: truncation exceeds the lattice bound");
  const double b0 = ladder.mass(0);
  if (b0 >= 1.0 - 1e-12)
    throw precondition_error(
        "renewal: law is concentrated at 0, potential diverges");

  // Positive-support masses rescaled by the atom at zero.
  std::vector<std::pair<int, double>> jumps;
  for (const auto& [k, b] : ladder.masses()) {
    if (k >= 1 && b > 0.0) jumps.emplace_back(k, b / (1.0 - b0));
  }

  std::vector<double> u(static_cast<std::size_t>(truncation) + 1, 0.0);
  u[0] = 1.0 / (1.0 - b0);
  for (int k = 1; k <= truncation; ++k) {
    double acc = 0.0;
    for (const auto& [j, bj] : jumps) {
      if (j > k) break;
      acc += bj * u[static_cast<std::size_t>(k - j)];
    }
    u[static_cast<std::size_t>(k)] = acc;
  }

  const bool proper = ladder.is_proper();
  const double mean = ladder.mean();
  return RenewalSequence{ladder, std::move(u), mean,
                         proper ? 1.0 / mean : 0.0, proper};
}

RenewalLimitCheck renewal_limit_check(const RenewalSequence& seq, int window,
                                      double tol) {
  if (window < 1 || static_cast<std::size_t>(window) > seq.values.size())
    throw parameter_error("renewal check: window out of range");
  if (seq.proper && seq.source.span() != 1)
    throw precondition_error(
        "renewal check: proper limit statement needs a span-1 law");
  RenewalLimitCheck check;
  for (std::size_t i = seq.values.size() - static_cast<std::size_t>(window);
       i < seq.values.size(); ++i) {
    check.deviation = std::max(check.deviation, std::abs(seq.values[i] - seq.limit));
  }
  check.pass = check.deviation < tol;
  return check;
}

}  // namespace whlab
