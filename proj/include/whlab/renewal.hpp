#pragma once

#include <vector>

#include "whlab/lattice.hpp"

namespace whlab {

// ===========================================================================
// Renewal potential of a (possibly defective) ladder law
// ===========================================================================
//
// u_k = sum_{i >= 0} P(ladder chain visits k in i jumps).  An atom at zero is
// resummed into the recursion, so u_0 = 1/(1 - b_0) and weak laws are handled
// by the same code path as strict ones.  This equals the potential density of
// the killed compound-Poisson subordinator attached by make_exponent, because
// masses plus defect are normalised to 1.

struct RenewalSequence {
  DefectiveLaw source;         // law the potential was built from
  std::vector<double> values;  // u_0 .. u_K
  double source_mean = 0.0;    // sum k * b_k of the generating law
  // Predicted tail value: 1/mean for proper laws, 0 for defective ones.
  double limit = 0.0;
  bool proper = false;
};

// First truncation+1 potential values.  Sources with b_0 >= 1 - 1e-12 have a
// divergent potential at 0 and are rejected with precondition_error.
RenewalSequence renewal_sequence(const DefectiveLaw& ladder, int truncation);

struct RenewalLimitCheck {
  bool pass = false;
  double deviation = 0.0;  // max |u_k - limit| over the trailing window
};

// Compares the last `window` values against the predicted limit.  The limit
// statement needs span 1 when the law is proper; other spans raise
// precondition_error.  Defective laws converge to 0 on any span.
RenewalLimitCheck renewal_limit_check(const RenewalSequence& seq, int window,
                                      double tol);

}  // namespace whlab
