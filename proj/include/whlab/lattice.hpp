#pragma once

#include <complex>
#include <map>
#include <vector>

#include "whlab/errors.hpp"

namespace whlab {

using complex = std::complex<double>;

// Lattice points are bounded so that downstream polynomial degrees and
// renewal truncations stay desk-scale.
inline constexpr int kMaxLatticePoint = 1 << 20;

// Validation slack on mass sums before the single exact renormalisation.
inline constexpr double kMassTolerance = 1e-12;

enum class LadderKind { StrictAscending, WeakDescending };

// ===========================================================================
// StepLaw: finite-support pmf of a random-walk increment
// ===========================================================================
//
// Support lives in {-m, ..., n} with m, n >= 0 and tight ends: p(-m) > 0 and
// p(n) > 0.  One-sided laws are therefore representable only with an atom at
// zero, and the identically-zero step is rejected outright.  Masses are
// validated against kMassTolerance and renormalised exactly once here, so
// every consumer may assume sum(p) == 1 to machine precision.
class StepLaw {
 public:
  explicit StepLaw(const std::map<int, double>& pmf);

  // Downward reach m >= 0; the walk's most negative step is -m.
  int down_reach() const { return m_; }
  // Upward reach n >= 0; the walk's most positive step is n.
  int up_reach() const { return n_; }

  double mass(int k) const;
  std::map<int, double> as_map() const;

  double mean() const;
  // P(X != 0), the rate of the compound-Poisson embedding.
  double p_nonzero() const { return 1.0 - mass(0); }
  bool two_sided() const { return m_ > 0 && n_ > 0; }

  // E[e^{izX}].  The domain depends on the support: two-sided laws admit
  // real z only, laws with no negative steps admit Im z >= 0, laws with no
  // positive steps admit Im z <= 0.  Violations raise domain_error.
  complex phi(complex z) const;
  complex psi(complex z) const { return 1.0 - phi(z); }
  // 1 - r*phi(z), the quantity factorised under geometric killing r.
  complex psi_killed(complex z, double r) const { return 1.0 - r * phi(z); }

  StepLaw reflected() const;
  // Divides every support point by eta; requires eta to divide the support.
  StepLaw rescaled_by(int eta) const;

 private:
  int m_ = 0;
  int n_ = 0;
  std::vector<double> p_;  // dense over [-m_, n_], index k + m_
};

struct CharValue {
  complex phi;
  complex psi;  // 1 - phi
};

// phi and psi at z, with the domain rules of StepLaw::phi.
CharValue char_function(const StepLaw& law, complex z);

// gcd of |k| over the support minus {0}; the lattice span eta.
int minimal_span(const StepLaw& law);

struct SpanNormalised {
  StepLaw law;  // support divided by eta, span 1
  int eta;
};

// Rescales a law to span 1.  Reports carry eta so results can be mapped back.
SpanNormalised normalise_span(const StepLaw& law);

struct CompoundPoissonEmbedding {
  double rate;      // P(X != 0)
  StepLaw jumps;    // law of X conditioned on X != 0
};

// The unit-rate compound-Poisson embedding of the walk: psi(z) factorises as
// rate * (1 - E[e^{izX} | X != 0]) with no atom at zero in the jump law.
CompoundPoissonEmbedding embed_compound_poisson(const StepLaw& law);

// ===========================================================================
// DefectiveLaw: sub-probability on {0, 1, 2, ...} plus a cemetery mass
// ===========================================================================
//
// Ladder-height laws.  Ascending laws are strict (no atom at zero); weak
// descending laws may carry one.  Descending heights are stored as
// magnitudes.  Masses plus defect must sum to 1 within kMassTolerance and
// are renormalised exactly once.
class DefectiveLaw {
 public:
  DefectiveLaw(const std::map<int, double>& masses, double defect, bool strict);

  double mass(int k) const;
  const std::map<int, double>& masses() const { return b_; }
  double defect() const { return q_; }
  bool strict() const { return strict_; }

  double total_mass() const { return 1.0 - q_; }
  double mean() const;        // sum k * b_k
  int max_support() const;    // largest k with b_k > 0, 0 if none
  // gcd over {k >= 1 : b_k > 0}; 0 when there is no positive support.
  int span() const;
  bool is_proper(double tol = 1e-9) const { return q_ <= tol; }

 private:
  std::map<int, double> b_;
  double q_ = 0.0;
  bool strict_ = true;
};

// L-infinity distance over the union of supports, including the defects.
double linf_distance(const DefectiveLaw& a, const DefectiveLaw& b);

// ===========================================================================
// SubordinatorExponent: killing q, drift d, finite Levy measure on {1,2,...}
// ===========================================================================
//
// kappa(z) = q - i d z + sum_k mu_k (1 - e^{izk}), defined for Im z >= 0.
// Lattice ladder processes always have d = 0; the drift field exists so the
// Bernstein-type checks can state that explicitly.
class SubordinatorExponent {
 public:
  SubordinatorExponent(double killing, double drift,
                       const std::map<int, double>& levy_atoms);

  double killing() const { return q_; }
  double drift() const { return d_; }
  const std::map<int, double>& levy_atoms() const { return mu_; }

  double total_levy_mass() const;      // mu({1,2,...})
  // Upper tail mu((j, infinity)) for j >= 0; tail(0) is the total mass.
  double levy_tail(int j) const;
  double mean() const;                 // sum k * mu_k

  // Requires Im z >= 0 (up to rounding slack); domain_error otherwise.
  complex evaluate(complex z) const;

 private:
  double q_ = 0.0;
  double d_ = 0.0;
  std::map<int, double> mu_;
  std::vector<double> tail_;  // tail_[j] = mu((j, infinity)), j = 0..max
};

complex evaluate_exponent(const SubordinatorExponent& exponent, complex z);

// Killed compound-Poisson exponent of a ladder law: killing = defect, Levy
// atoms = masses at k >= 1 (an atom at zero contributes nothing to kappa).
SubordinatorExponent make_exponent(const DefectiveLaw& law);

}  // namespace whlab
