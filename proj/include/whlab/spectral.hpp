#pragma once

#include <vector>

#include "whlab/lattice.hpp"

namespace whlab {

// ===========================================================================
// Spectral route: factor 1 - r*phi(s) by splitting the roots of
// P(s) = s^m (1 - r*phi(s)) across the unit circle.
// ===========================================================================

// Laurent coefficients of 1 - r*phi(s) on [low, high] = [-m, n].  The array
// doubles as the monomial coefficients of P(s) = s^m (1 - r*phi(s)):
// coeff[j] multiplies s^{low+j} in the Laurent view and s^j in P.
struct LaurentPolynomial {
  int low = 0;
  int high = 0;
  std::vector<double> coeff;

  double at(int k) const;          // Laurent coefficient of s^k
  int degree() const { return high - low; }
  complex evaluate_unit(double z) const;  // value at s = e^{iz}
};

// Requires 0 < r <= 1.  Extreme coefficients are nonzero by law tightness,
// so P has degree exactly m+n and no root at the origin.
LaurentPolynomial to_polynomial(const StepLaw& law, double r);

// Roots of P split by modulus.  For r < 1 the circle is root-free; for r = 1
// the root(s) at s = 1 (double when the walk is zero-mean) are deflated
// symbolically and reported in on_circle.  Any other near-circle root aborts
// the factorisation rather than guessing a side.
struct RootSplit {
  std::vector<complex> inside;     // |rho| < 1
  std::vector<complex> outside;    // |rho| > 1
  std::vector<complex> on_circle;  // copies of 1 only
  double killing = 1.0;
  int mean_sign = 0;               // sign of E[X], zero within 1e-12
};

RootSplit find_and_classify_roots(const LaurentPolynomial& poly, double mean,
                                  double r);

struct FactorPair {
  DefectiveLaw ascending;   // strict; zeros of its transform are the outside roots
  DefectiveLaw descending;  // weak; zeros come from the inside roots
};

// Expands the ascending factor from the outside roots (unit constant term),
// fixes the remaining constant by matching the top coefficient of P, and
// validates the split at s = -1.  Root 1 goes to the proper side: ascending
// when E[X] > 0, descending when E[X] < 0, one copy each at zero mean.
FactorPair assemble_factors(const RootSplit& split, const LaurentPolynomial& poly);

struct Factorisation {
  int eta = 1;          // span of the original law
  double killing = 1.0;
  StepLaw rescaled;     // span-1 walk actually factorised
  LaurentPolynomial poly;
  RootSplit roots;
  DefectiveLaw ascending;
  DefectiveLaw descending;
};

// Full pipeline: span-normalise, build P, split roots, assemble factors.
Factorisation factorise(const StepLaw& law, double r);

}  // namespace whlab
