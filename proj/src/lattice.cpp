#include "whlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace whlab {

namespace {

// Imaginary slack treated as "real axis" in domain checks.
constexpr double kImagSlack = 1e-12;

complex unit_power(complex w, int k) {
  // w^k by binary exponentiation; k may be negative (w != 0).
  if (k < 0) return 1.0 / unit_power(w, -k);
  complex acc = 1.0;
  complex base = w;
  unsigned e = static_cast<unsigned>(k);
  while (e != 0) {
    if (e & 1u) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

}  // namespace

// ===========================================================================
// StepLaw
// ===========================================================================

StepLaw::StepLaw(const std::map<int, double>& pmf) {
  if (pmf.empty()) throw invalid_law_error("step law: empty pmf");

  int lo = 0, hi = 0;
  bool any = false;
  double total = 0.0;
  for (const auto& [k, p] : pmf) {
    if (!std::isfinite(p)) throw invalid_law_error("step law: non-finite mass");
    if (p < 0.0) {
      std::ostringstream os;
      os << "step law: negative mass " << p << " at " << k;
      throw invalid_law_error(os.str());
    }
    if (p == 0.0) continue;
    if (k < -kMaxLatticePoint || k > kMaxLatticePoint)
      throw invalid_law_error("step law: lattice point out of range");
    if (!any) {
      lo = hi = k;
      any = true;
    } else {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    total += p;
  }
  if (!any) throw invalid_law_error("step law: no positive mass");
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << "step law: masses sum to " << total << ", expected 1 within "
       << kMassTolerance;
    throw invalid_law_error(os.str());
  }
  if (lo == 0 && hi == 0)
    throw invalid_law_error("step law: identically zero step");
  if (lo > 0 || hi < 0)
    throw invalid_law_error(
        "step law: support must straddle 0 (one-sided laws need an atom at 0)");

  m_ = -lo;
  n_ = hi;
  p_.assign(static_cast<std::size_t>(m_ + n_ + 1), 0.0);
  // Renormalise exactly once; downstream code assumes sum == 1.
  for (const auto& [k, p] : pmf) {
    if (p > 0.0) p_[static_cast<std::size_t>(k + m_)] = p / total;
  }
}

double StepLaw::mass(int k) const {
  if (k < -m_ || k > n_) return 0.0;
  return p_[static_cast<std::size_t>(k + m_)];
}

std::map<int, double> StepLaw::as_map() const {
  std::map<int, double> out;
  for (int k = -m_; k <= n_; ++k) {
    const double p = mass(k);
    if (p > 0.0) out[k] = p;
  }
  return out;
}

double StepLaw::mean() const {
  double s = 0.0;
  for (int k = -m_; k <= n_; ++k) s += k * mass(k);
  return s;
}

complex StepLaw::phi(complex z) const {
  const double im = z.imag();
  if (two_sided()) {
    if (std::abs(im) > kImagSlack)
      throw domain_error("char function: two-sided support requires real z");
  } else if (m_ == 0) {
    if (im < -kImagSlack)
      throw domain_error("char function: support in [0,n] requires Im z >= 0");
  } else {
    if (im > kImagSlack)
      throw domain_error("char function: support in [-m,0] requires Im z <= 0");
  }
  const complex w = std::exp(complex(0.0, 1.0) * z);
  // Horner over the dense coefficients, then shift by w^{-m}.
  complex acc = 0.0;
  for (int j = m_ + n_; j >= 0; --j) acc = acc * w + p_[static_cast<std::size_t>(j)];
  return acc * unit_power(w, -m_);
}

StepLaw StepLaw::reflected() const {
  std::map<int, double> pmf;
  for (int k = -m_; k <= n_; ++k) {
    const double p = mass(k);
    if (p > 0.0) pmf[-k] = p;
  }
  return StepLaw(pmf);
}

StepLaw StepLaw::rescaled_by(int eta) const {
  if (eta <= 0) throw parameter_error("rescale: span must be positive");
  std::map<int, double> pmf;
  for (int k = -m_; k <= n_; ++k) {
    const double p = mass(k);
    if (p == 0.0) continue;
    if (k % eta != 0)
      throw parameter_error("rescale: span does not divide the support");
    pmf[k / eta] = p;
  }
  return StepLaw(pmf);
}

CharValue char_function(const StepLaw& law, complex z) {
  const complex f = law.phi(z);
  return CharValue{f, 1.0 - f};
}

int minimal_span(const StepLaw& law) {
  int g = 0;
  for (int k = -law.down_reach(); k <= law.up_reach(); ++k) {
    if (k == 0 || law.mass(k) == 0.0) continue;
    g = std::gcd(g, std::abs(k));
  }
  if (g == 0) throw invalid_law_error("span: support is {0}");
  return g;
}

SpanNormalised normalise_span(const StepLaw& law) {
  const int eta = minimal_span(law);
  if (eta == 1) return SpanNormalised{law, 1};
  return SpanNormalised{law.rescaled_by(eta), eta};
}

CompoundPoissonEmbedding embed_compound_poisson(const StepLaw& law) {
  const double rate = law.p_nonzero();
  if (rate <= 0.0)
    throw invalid_law_error("embedding: law is concentrated at zero");
  std::map<int, double> jumps;
  for (int k = -law.down_reach(); k <= law.up_reach(); ++k) {
    if (k == 0) continue;
    const double p = law.mass(k);
    if (p > 0.0) jumps[k] = p / rate;
  }
  return CompoundPoissonEmbedding{rate, StepLaw(jumps)};
}

// ===========================================================================
// DefectiveLaw
// ===========================================================================

DefectiveLaw::DefectiveLaw(const std::map<int, double>& masses, double defect,
                           bool strict)
    : strict_(strict) {
  if (!std::isfinite(defect) || defect < -kMassTolerance)
    throw invalid_law_error("defective law: negative defect");
  double total = std::max(defect, 0.0);
  for (const auto& [k, b] : masses) {
    if (!std::isfinite(b)) throw invalid_law_error("defective law: non-finite mass");
    if (b < -kMassTolerance) {
      std::ostringstream os;
      os << "defective law: negative mass " << b << " at " << k;
      throw invalid_law_error(os.str());
    }
    if (b <= 0.0) continue;
    if (k < 0)
      throw invalid_law_error(
          "defective law: ladder heights are stored as non-negative magnitudes");
    if (k > kMaxLatticePoint)
      throw invalid_law_error("defective law: lattice point out of range");
    if (strict && k == 0 && b > kMassTolerance)
      throw invalid_law_error("defective law: strict law carries an atom at 0");
    if (!(strict && k == 0)) {
      b_[k] = b;
      total += b;
    }
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << "defective law: masses plus defect sum to " << total
       << ", expected 1 within " << kMassTolerance;
    throw invalid_law_error(os.str());
  }
  // Renormalise exactly once.
  q_ = std::max(defect, 0.0) / total;
  for (auto& [k, b] : b_) b /= total;
}

double DefectiveLaw::mass(int k) const {
  auto it = b_.find(k);
  return it == b_.end() ? 0.0 : it->second;
}

double DefectiveLaw::mean() const {
  double s = 0.0;
  for (const auto& [k, b] : b_) s += static_cast<double>(k) * b;
  return s;
}

int DefectiveLaw::max_support() const {
  int best = 0;
  for (const auto& [k, b] : b_) {
    if (b > 0.0) best = std::max(best, k);
  }
  return best;
}

int DefectiveLaw::span() const {
  int g = 0;
  for (const auto& [k, b] : b_) {
    if (k >= 1 && b > 0.0) g = std::gcd(g, k);
  }
  return g;
}

double linf_distance(const DefectiveLaw& a, const DefectiveLaw& b) {
  double d = std::abs(a.defect() - b.defect());
  for (const auto& [k, v] : a.masses()) d = std::max(d, std::abs(v - b.mass(k)));
  for (const auto& [k, v] : b.masses()) d = std::max(d, std::abs(v - a.mass(k)));
  return d;
}

// ===========================================================================
// SubordinatorExponent
// ===========================================================================

SubordinatorExponent::SubordinatorExponent(double killing, double drift,
                                           const std::map<int, double>& levy_atoms)
    : q_(killing), d_(drift) {
  if (!std::isfinite(q_) || q_ < 0.0)
    throw invalid_law_error("exponent: killing rate must be >= 0");
  if (!std::isfinite(d_) || d_ < 0.0)
    throw invalid_law_error("exponent: drift must be >= 0");
  int max_k = 0;
  for (const auto& [k, mu] : levy_atoms) {
    if (!std::isfinite(mu) || mu < 0.0)
      throw invalid_law_error("exponent: Levy atoms must be >= 0");
    if (mu == 0.0) continue;
    if (k < 1) throw invalid_law_error("exponent: Levy atoms live on {1,2,...}");
    if (k > kMaxLatticePoint)
      throw invalid_law_error("exponent: lattice point out of range");
    mu_[k] = mu;
    max_k = std::max(max_k, k);
  }
  // tail_[j] = mu((j, infinity)); tail_[0] is the total mass.
  tail_.assign(static_cast<std::size_t>(max_k) + 1, 0.0);
  double acc = 0.0;
  for (int j = max_k - 1; j >= 0; --j) {
    auto it = mu_.find(j + 1);
    if (it != mu_.end()) acc += it->second;
    tail_[static_cast<std::size_t>(j)] = acc;
  }
}

double SubordinatorExponent::total_levy_mass() const {
  return tail_.empty() ? 0.0 : tail_[0];
}

double SubordinatorExponent::levy_tail(int j) const {
  if (j < 0) throw parameter_error("levy tail: index must be >= 0");
  if (static_cast<std::size_t>(j) >= tail_.size()) return 0.0;
  return tail_[static_cast<std::size_t>(j)];
}

double SubordinatorExponent::mean() const {
  double s = 0.0;
  for (const auto& [k, mu] : mu_) s += static_cast<double>(k) * mu;
  return s;
}

complex SubordinatorExponent::evaluate(complex z) const {
  if (z.imag() < -kImagSlack)
    throw domain_error("exponent: defined on the closed upper half-plane");
  const complex i(0.0, 1.0);
  complex acc = q_ - i * d_ * z;
  for (const auto& [k, mu] : mu_) {
    acc += mu * (1.0 - std::exp(i * z * static_cast<double>(k)));
  }
  return acc;
}

complex evaluate_exponent(const SubordinatorExponent& exponent, complex z) {
  return exponent.evaluate(z);
}

SubordinatorExponent make_exponent(const DefectiveLaw& law) {
  std::map<int, double> atoms;
  for (const auto& [k, b] : law.masses()) {
    if (k >= 1 && b > 0.0) atoms[k] = b;
  }
  return SubordinatorExponent(law.defect(), 0.0, atoms);
}

}  // namespace whlab
