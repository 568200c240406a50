#include "whlab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace whlab {

namespace {

constexpr double kZeroMeanTol = 1e-12;

// Horner evaluation of a monomial-coefficient polynomial at a complex point.
complex horner(const std::vector<double>& c, complex s) {
  complex acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

complex horner_derivative(const std::vector<double>& c, complex s) {
  complex acc = 0.0;
  for (std::size_t j = c.size(); j-- > 1;) {
    acc = acc * s + static_cast<double>(j) * c[j];
  }
  return acc;
}

// Synthetic division by (s - 1).  The remainder is P(1), which vanishes for
// r = 1 up to accumulated rounding in the mass sums.
std::vector<double> deflate_at_one(const std::vector<double>& c, double* remainder) {
  std::vector<double> q(c.size() - 1, 0.0);
  double carry = c.back();
  for (std::size_t j = c.size() - 1; j-- > 0;) {
    q[j] = carry;
    carry = c[j] + carry;
  }
  *remainder = carry;
  return q;
}

// monic holds the low-order coefficients a_0..a_{d-1} of a degree-d monic
// polynomial; the leading 1 is implicit.
std::vector<complex> companion_eigenvalues(const std::vector<double>& monic) {
  const std::size_t d = monic.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i + 1 < d; ++i) {
    c(static_cast<Eigen::Index>(i) + 1, static_cast<Eigen::Index>(i)) = 1.0;
  }
  for (std::size_t i = 0; i < d; ++i) {
    c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d) - 1) = -monic[i];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(c, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw factorisation_error("root finding: eigenvalue iteration failed");
  std::vector<complex> roots;
  roots.reserve(d);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    roots.push_back(solver.eigenvalues()(i));
  }
  return roots;
}

void sort_roots(std::vector<complex>& roots) {
  std::sort(roots.begin(), roots.end(), [](complex a, complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

// Expand prod (1 - s/sigma) or C * prod (1 - rho t); the running constant
// term stays exactly at its seed value.
std::vector<complex> expand_product(complex seed, const std::vector<complex>& factors,
                                    bool reciprocal) {
  std::vector<complex> coeff{seed};
  for (complex root : factors) {
    const complex mult = reciprocal ? -1.0 / root : -root;
    coeff.push_back(0.0);
    for (std::size_t j = coeff.size() - 1; j >= 1; --j) {
      coeff[j] += coeff[j - 1] * mult;
    }
  }
  return coeff;
}

std::vector<double> realise_coefficients(const std::vector<complex>& coeff,
                                         const char* what) {
  std::vector<double> out(coeff.size(), 0.0);
  for (std::size_t j = 0; j < coeff.size(); ++j) {
    if (std::abs(coeff[j].imag()) > 1e-10) {
      std::ostringstream os;
      os << what << ": conjugate closure violated, imaginary residue "
         << coeff[j].imag() << " at degree " << j;
      throw factorisation_error(os.str());
    }
    out[j] = coeff[j].real();
  }
  return out;
}

// Coefficients of a factor transform 1 - sum_k m_k x^k with tiny negative
// dust clamped; anything beyond dust signals a misclassified root.  Positive
// dust below 1e-15 is product-expansion roundoff and is dropped as well.
std::map<int, double> masses_from_expansion(const std::vector<double>& coeff,
                                            int first_index, const char* what) {
  std::map<int, double> masses;
  for (std::size_t j = static_cast<std::size_t>(first_index); j < coeff.size(); ++j) {
    double mk = -coeff[j];
    if (mk < -1e-10) {
      std::ostringstream os;
      os << what << ": negative coefficient " << mk << " at lattice point " << j;
      throw factorisation_error(os.str());
    }
    if (mk > 1e-15) masses[static_cast<int>(j)] = mk;
  }
  return masses;
}

}  // namespace

double LaurentPolynomial::at(int k) const {
  if (k < low || k > high) return 0.0;
  return coeff[static_cast<std::size_t>(k - low)];
}

complex LaurentPolynomial::evaluate_unit(double z) const {
  const complex w = std::exp(complex(0.0, z));
  complex acc = horner(coeff, w);
  // Shift back by w^{low}; |w| = 1 so the reciprocal is the conjugate.
  complex shift = 1.0;
  const complex base = low < 0 ? std::conj(w) : w;
  for (int j = 0; j < std::abs(low); ++j) shift *= base;
  return acc * shift;
}

LaurentPolynomial to_polynomial(const StepLaw& law, double r) {
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("killing parameter must lie in (0, 1]");
  LaurentPolynomial poly;
  poly.low = -law.down_reach();
  poly.high = law.up_reach();
  poly.coeff.assign(static_cast<std::size_t>(poly.degree()) + 1, 0.0);
  for (int k = poly.low; k <= poly.high; ++k) {
    poly.coeff[static_cast<std::size_t>(k - poly.low)] =
        (k == 0 ? 1.0 : 0.0) - r * law.mass(k);
  }
  return poly;
}

RootSplit find_and_classify_roots(const LaurentPolynomial& poly, double mean,
                                  double r) {
  if (poly.degree() < 1)
    throw precondition_error("root finding: polynomial is constant");
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("killing parameter must lie in (0, 1]");

  const int degree = poly.degree();
  const double circle_tol = 1e-8 * (1.0 + degree);
  double scale = 0.0;
  for (double c : poly.coeff) scale += std::abs(c);

  RootSplit split;
  split.killing = r;
  split.mean_sign = mean > kZeroMeanTol ? 1 : (mean < -kZeroMeanTol ? -1 : 0);

  std::vector<double> work = poly.coeff;
  if (r == 1.0) {
    // s = 1 is always a zero of 1 - phi; double when the mean vanishes.
    const int copies = split.mean_sign == 0 ? 2 : 1;
    for (int i = 0; i < copies; ++i) {
      double remainder = 0.0;
      work = deflate_at_one(work, &remainder);
      if (std::abs(remainder) > 1e-9 * scale) {
        std::ostringstream os;
        os << "root finding: expected root at 1, synthetic remainder "
           << remainder;
        throw factorisation_error(os.str());
      }
      split.on_circle.push_back(1.0);
      if (work.size() == 1) break;
    }
  }

  if (work.size() > 1) {
    std::vector<double> monic(work.size() - 1);
    const double lead = work.back();
    for (std::size_t j = 0; j + 1 < work.size(); ++j) monic[j] = work[j] / lead;
    std::vector<complex> roots = companion_eigenvalues(monic);
    for (complex& rho : roots) {
      // One Newton step against the deflated polynomial tightens the
      // eigenvalue estimate without risking a basin change.
      const complex dp = horner_derivative(work, rho);
      if (std::abs(dp) > 1e-14) rho -= horner(work, rho) / dp;
      const double dist = std::abs(std::abs(rho) - 1.0);
      if (dist <= circle_tol) {
        std::ostringstream os;
        os << "root finding: unexpected root on the unit circle at ("
           << rho.real() << ", " << rho.imag()
           << "); span violation or unnormalised law";
        throw factorisation_error(os.str());
      }
      (std::abs(rho) < 1.0 ? split.inside : split.outside).push_back(rho);
    }
  }

  sort_roots(split.inside);
  sort_roots(split.outside);

  // Count check: the descending side must end up with m roots and the
  // ascending side with n, after the drift rule assigns the circle roots.
  const int m = -poly.low;
  const int n = poly.high;
  int desc_circle = 0, asc_circle = 0;
  if (!split.on_circle.empty()) {
    if (split.mean_sign > 0) asc_circle = static_cast<int>(split.on_circle.size());
    else if (split.mean_sign < 0) desc_circle = static_cast<int>(split.on_circle.size());
    else { asc_circle = 1; desc_circle = 1; }
  }
  const int desc_total = static_cast<int>(split.inside.size()) + desc_circle;
  const int asc_total = static_cast<int>(split.outside.size()) + asc_circle;
  if (desc_total != m || asc_total != n) {
    std::ostringstream os;
    os << "root finding: split " << desc_total << "/" << asc_total
       << " does not match reaches " << m << "/" << n;
    throw factorisation_error(os.str());
  }
  return split;
}

FactorPair assemble_factors(const RootSplit& split, const LaurentPolynomial& poly) {
  std::vector<complex> asc_roots = split.outside;
  std::vector<complex> desc_roots = split.inside;
  if (!split.on_circle.empty()) {
    if (split.mean_sign > 0) {
      asc_roots.insert(asc_roots.end(), split.on_circle.begin(), split.on_circle.end());
    } else if (split.mean_sign < 0) {
      desc_roots.insert(desc_roots.end(), split.on_circle.begin(), split.on_circle.end());
    } else {
      asc_roots.push_back(split.on_circle.front());
      desc_roots.push_back(split.on_circle.front());
    }
  }
  sort_roots(asc_roots);
  sort_roots(desc_roots);

  // Ascending transform prod (1 - s/sigma): unit constant term by
  // construction, so the law below is strict.
  const std::vector<double> a =
      realise_coefficients(expand_product(1.0, asc_roots, /*reciprocal=*/true),
                           "ascending factor");

  // The remaining constant is fixed by the top coefficient of P and then
  // cross-checked at s = -1.
  complex lead = 1.0;
  for (complex sigma : asc_roots) lead *= -1.0 / sigma;
  if (std::abs(lead) < 1e-300)
    throw factorisation_error("descending factor: degenerate leading coefficient");
  const complex c0 = poly.at(poly.high) / lead;
  const std::vector<double> b = realise_coefficients(
      expand_product(c0, desc_roots, /*reciprocal=*/false), "descending factor");

  // Validation at s = -1: the split must reproduce 1 - r*phi(-1).
  double a_at = 0.0, b_at = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) a_at += (j % 2 ? -a[j] : a[j]);
  for (std::size_t j = 0; j < b.size(); ++j) b_at += (j % 2 ? -b[j] : b[j]);
  const double lhs = poly.evaluate_unit(M_PI).real();
  if (std::abs(lhs - a_at * b_at) > 1e-9 * (1.0 + std::abs(lhs)))
    throw factorisation_error("factor assembly: validation at s = -1 failed");

  std::map<int, double> asc_masses = masses_from_expansion(a, 1, "ascending factor");
  std::map<int, double> desc_masses = masses_from_expansion(b, 1, "descending factor");
  const double atom0 = 1.0 - b[0];
  if (atom0 < -1e-10 || atom0 > 1.0 + 1e-10)
    throw factorisation_error("descending factor: atom at 0 out of range");
  if (atom0 > 0.0) desc_masses[0] = atom0;

  // Rounding dust can push a total a hair past 1; rescale rather than carry a
  // clamped defect that breaks the exact-sum invariant downstream.
  auto finish = [](std::map<int, double>& masses, bool strict, const char* what) {
    double total = 0.0;
    for (const auto& [k, v] : masses) total += v;
    double defect = 1.0 - total;
    if (defect < -1e-10) {
      std::ostringstream os;
      os << what << ": masses exceed 1 by " << -defect;
      throw factorisation_error(os.str());
    }
    if (defect < 0.0) {
      for (auto& [k, v] : masses) v /= total;
      defect = 0.0;
    }
    return DefectiveLaw(masses, defect, strict);
  };

  return FactorPair{finish(asc_masses, /*strict=*/true, "ascending factor"),
                    finish(desc_masses, /*strict=*/false, "descending factor")};
}

Factorisation factorise(const StepLaw& law, double r) {
  SpanNormalised sn = normalise_span(law);
  LaurentPolynomial poly = to_polynomial(sn.law, r);
  RootSplit split = find_and_classify_roots(poly, sn.law.mean(), r);
  FactorPair pair = assemble_factors(split, poly);
  return Factorisation{sn.eta,           r,
                       sn.law,           std::move(poly),
                       std::move(split), std::move(pair.ascending),
                       std::move(pair.descending)};
}

}  // namespace whlab
