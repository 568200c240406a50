#pragma once

#include <vector>

#include "whlab/lattice.hpp"

namespace whlab {

// ===========================================================================
// Series route: ladder transforms from harmonic-weighted n-step laws
// ===========================================================================
//
// Exponentiates sums over the walk's n-step distributions instead of locating
// any polynomial root, so results from this path are an independent cross
// check on the spectral factoriser.  Killed walks only: the harmonic weights
// r^n / n need r < 1 to converge.

// Dense table of P(S_n = k) for n = 1..horizon, built by repeated
// convolution with the step law.  Row n covers [-n*m, n*n_up].
class ConvolutionPowerTable {
 public:
  // Requires horizon >= 1 and horizon * max(m, n) within the lattice bound.
  ConvolutionPowerTable(const StepLaw& law, int horizon);

  int horizon() const { return horizon_; }
  int down_reach() const { return m_; }
  int up_reach() const { return n_; }

  // P(S_n = k); zero outside the reachable range, n must be in [1, horizon].
  double probability(int n, int k) const;

 private:
  int m_ = 0;
  int n_ = 0;
  int horizon_ = 0;
  std::vector<std::vector<double>> rows_;  // rows_[n-1] dense over row support
};

struct SpitzerFactor {
  DefectiveLaw law;
  // Sup-norm bound on the transform error from stopping the series:
  // e * r^{N+1} / ((N+1)(1-r)).  Per-atom errors obey the same bound.
  double error_bound = 0.0;
  int horizon = 0;
};

// Smallest N whose error bound drops below target.  Requires 0 < r < 1.
int spitzer_auto_horizon(double r, double target = 1e-10);

// Ladder factor of the requested kind after `horizon` series terms
// (0 selects the horizon for a 1e-10 bound).  Coefficients are clamped to
// [0, 1] only within the reported error bound; larger violations raise
// precision_error.  Requires 0 < r < 1.
SpitzerFactor spitzer_factor(const StepLaw& law, double r, LadderKind kind,
                             int horizon = 0);

struct SpitzerPair {
  SpitzerFactor ascending;
  SpitzerFactor descending;
};

// Both factors from a single convolution table.
SpitzerPair spitzer_pair(const StepLaw& law, double r, int horizon = 0);

}  // namespace whlab
