#include "whlab/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace whlab {

namespace {

std::vector<double> grid_points(int grid_size) {
  if (grid_size < 2) throw parameter_error("grid: size must be >= 2");
  std::vector<double> z(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    z[static_cast<std::size_t>(i)] = -M_PI + 2.0 * M_PI * i / grid_size;
  }
  return z;
}

void validate_side(const FactorSide& side, const char* what) {
  if (!std::isfinite(side.defect)) {
    std::ostringstream os;
    os << what << ": non-finite defect";
    throw input_error(os.str());
  }
  for (const auto& [k, v] : side.pmf) {
    if (k < 0) {
      std::ostringstream os;
      os << what << ": negative lattice point " << k;
      throw input_error(os.str());
    }
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << what << ": non-finite mass at " << k;
      throw input_error(os.str());
    }
  }
}

// Clamps validated dust and renormalises so the law constructor's exact-sum
// invariant holds.
DefectiveLaw clean_law(const std::map<int, double>& masses, double defect,
                       bool strict) {
  double total = std::max(defect, 0.0);
  std::map<int, double> out;
  for (const auto& [k, v] : masses) {
    if (v > 0.0) {
      out[k] = v;
      total += v;
    }
  }
  if (total <= 0.0)
    throw normalisation_error("normalise: side has no mass and no defect");
  for (auto& [k, v] : out) v /= total;
  return DefectiveLaw(out, std::max(defect, 0.0) / total, strict);
}

double side_atom(const FactorSide& side) {
  auto it = side.pmf.find(0);
  return it == side.pmf.end() ? 0.0 : it->second;
}

}  // namespace

FactorSide side_from_law(const DefectiveLaw& law) {
  return FactorSide{law.masses(), law.defect(), law.strict()};
}

FactorTransform FactorTransform::from_law(const DefectiveLaw& law) {
  return from_side(side_from_law(law));
}

FactorTransform FactorTransform::from_side(const FactorSide& side) {
  FactorTransform f;
  f.constant = side.defect;
  for (const auto& [k, v] : side.pmf) {
    if (k >= 1 && v != 0.0) {
      f.constant += v;
      f.coeffs[k] = v;
    }
  }
  return f;
}

FactorTransform FactorTransform::scaled(double c) const {
  if (!(c > 0.0))
    throw parameter_error("transform: scale must be positive");
  FactorTransform f;
  f.constant = c * constant;
  for (const auto& [k, v] : coeffs) f.coeffs[k] = c * v;
  return f;
}

complex FactorTransform::evaluate(double z) const {
  complex acc = constant;
  for (const auto& [k, v] : coeffs) {
    acc -= v * std::exp(complex(0.0, z * static_cast<double>(k)));
  }
  return acc;
}

NormalisedPair normalise_factor_pair(const FactorSide& plus,
                                     const FactorSide& minus, double tol) {
  if (!(tol >= 0.0))
    throw parameter_error("normalise: tolerance must be >= 0");
  validate_side(plus, "plus side");
  validate_side(minus, "minus side");
  if (!plus.strict)
    throw input_error("normalise: plus side must declare a strict ladder");
  if (minus.strict)
    throw input_error("normalise: minus side must declare a weak ladder");

  // The strict side has unit transform constant, so its raw constant is the
  // scale itself.
  double c = plus.defect;
  for (const auto& [k, v] : plus.pmf) {
    if (k >= 1) c += v;
  }
  if (!(c > tol))
    throw normalisation_error(
        "normalise: plus side admits no positive scale");
  if (std::abs(side_atom(plus)) > tol * c)
    throw normalisation_error(
        "normalise: plus side carries an atom at zero but claims a strict ladder");

  std::map<int, double> asc;
  for (const auto& [k, v] : plus.pmf) {
    if (k < 1) continue;
    const double b = v / c;
    if (b < -tol) {
      std::ostringstream os;
      os << "normalise: plus mass at " << k << " rescales to " << b;
      throw normalisation_error(os.str());
    }
    if (b > 0.0) asc[k] = b;
  }
  const double asc_defect = plus.defect / c;
  if (asc_defect < -tol)
    throw normalisation_error("normalise: plus defect rescales negative");

  // The minus side is multiplied by c; its atom at zero is pinned by the
  // requirement that the true transform constant be 1 - b_0.
  double g0 = minus.defect;
  for (const auto& [k, v] : minus.pmf) {
    if (k >= 1) g0 += v;
  }
  const double beta0 = 1.0 - c * g0;
  if (beta0 < -tol || beta0 > 1.0 + tol) {
    std::ostringstream os;
    os << "normalise: recovered atom at zero " << beta0
       << " outside [0, 1]; the sides do not share a scale";
    throw normalisation_error(os.str());
  }
  const double recorded_atom = c * side_atom(minus);
  if (std::abs(recorded_atom - beta0) > tol * (1.0 + std::abs(beta0))) {
    std::ostringstream os;
    os << "normalise: minus side records atom " << recorded_atom
       << " at zero but the pair scale implies " << beta0;
    throw normalisation_error(os.str());
  }

  std::map<int, double> desc;
  if (beta0 > 0.0) desc[0] = std::min(beta0, 1.0);
  for (const auto& [k, v] : minus.pmf) {
    if (k < 1) continue;
    const double b = c * v;
    if (b < -tol) {
      std::ostringstream os;
      os << "normalise: minus mass at " << k << " rescales to " << b;
      throw normalisation_error(os.str());
    }
    if (b > 0.0) desc[k] = b;
  }
  const double desc_defect = c * minus.defect;
  if (desc_defect < -tol)
    throw normalisation_error("normalise: minus defect rescales negative");

  return NormalisedPair{clean_law(asc, asc_defect, /*strict=*/true),
                        clean_law(desc, desc_defect, /*strict=*/false), c};
}

ResidualGrid factorisation_residual(const StepLaw& walk, double r,
                                    const FactorTransform& plus,
                                    const FactorTransform& minus,
                                    int grid_size) {
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("residual: killing parameter must lie in (0, 1]");
  if (minimal_span(walk) != 1)
    throw precondition_error("residual: the product identity needs a span-1 walk");
  ResidualGrid g;
  g.points = grid_points(grid_size);
  g.values.resize(g.points.size());
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    const double z = g.points[i];
    const complex lhs = walk.psi_killed(z, r);
    const complex rhs = plus.evaluate(z) * minus.evaluate(-z);
    g.values[i] = std::abs(lhs - rhs);
    g.max = std::max(g.max, g.values[i]);
  }
  return g;
}

RatioStatistics ratio_F(const FactorTransform& plus,
                        const FactorTransform& plus_ref,
                        const FactorTransform& minus,
                        const FactorTransform& minus_ref, int grid_size,
                        double exclusion) {
  const std::vector<double> z = grid_points(grid_size);
  std::vector<complex> up;
  std::vector<complex> low;
  up.reserve(z.size());
  low.reserve(z.size());
  for (const double zi : z) {
    if (std::abs(std::remainder(zi, 2.0 * M_PI)) < exclusion) continue;
    up.push_back(plus.evaluate(zi) / plus_ref.evaluate(zi));
    low.push_back(minus_ref.evaluate(-zi) / minus.evaluate(-zi));
  }
  if (up.empty())
    throw precondition_error("ratio: exclusion zone swallowed the whole grid");

  RatioStatistics st;
  st.points = static_cast<int>(up.size());
  complex mean = 0.0;
  for (const complex f : up) mean += f;
  mean /= static_cast<double>(up.size());
  st.mean = mean;
  for (std::size_t i = 0; i < up.size(); ++i) {
    st.dev = std::max(st.dev, std::abs(up[i] - mean));
    st.cross = std::max(st.cross, std::abs(up[i] - low[i]));
  }
  return st;
}

LatticeH h_sequence(const DefectiveLaw& ladder, const RenewalSequence& u,
                    int truncation) {
  if (truncation < 1)
    throw parameter_error("profile: truncation must be >= 1");
  if (u.values.size() < static_cast<std::size_t>(truncation) + 1)
    throw parameter_error("profile: renewal sequence shorter than the truncation");
  if (linf_distance(u.source, ladder) > 1e-10)
    throw input_error("profile: renewal sequence was not built from this law");

  const SubordinatorExponent exponent = make_exponent(ladder);
  const double q = exponent.killing();
  const int tail_len = ladder.max_support();  // levy_tail(j) = 0 for j >= this

  LatticeH h;
  h.values.resize(static_cast<std::size_t>(truncation) + 1);
  h.increments.assign(static_cast<std::size_t>(truncation) + 1, 0.0);

  double u_prefix = 0.0;
  for (int k = 0; k <= truncation; ++k) {
    u_prefix += u.values[static_cast<std::size_t>(k)];
    double acc = q * u_prefix;
    const int j_top = std::min(k, tail_len - 1);
    for (int j = 0; j <= j_top; ++j) {
      acc += exponent.levy_tail(j) * u.values[static_cast<std::size_t>(k - j)];
    }
    h.values[static_cast<std::size_t>(k)] = acc;
  }

  const double head = q + exponent.levy_tail(0);
  for (int k = 1; k <= truncation; ++k) {
    const double v =
        h.values[static_cast<std::size_t>(k)] - h.values[static_cast<std::size_t>(k - 1)];
    h.increments[static_cast<std::size_t>(k)] = v;
    double direct = head * u.values[static_cast<std::size_t>(k)];
    for (const auto& [j, a] : ladder.masses()) {
      if (j >= 1 && j <= k) direct -= a * u.values[static_cast<std::size_t>(k - j)];
    }
    h.decomposition_residual =
        std::max(h.decomposition_residual, std::abs(v - direct));
  }
  return h;
}

TailCheck tail_lemma_check(const LatticeH& h, double epsilon, double tol) {
  if (!(epsilon > 0.0))
    throw parameter_error("tail check: epsilon must be positive");
  const int truncation = static_cast<int>(h.values.size()) - 1;
  if (truncation < 4)
    throw parameter_error("tail check: truncation too small to compare partial sums");
  const int half = truncation / 2;
  double s_half = 0.0;
  double s_full = 0.0;
  for (int k = 1; k <= truncation; ++k) {
    const double term =
        std::pow(static_cast<double>(k), -(2.0 + epsilon)) *
        h.values[static_cast<std::size_t>(k)];
    s_full += term;
    if (k <= half) s_half += term;
  }
  TailCheck t;
  t.difference = std::abs(s_full - s_half);
  t.growth = h.values[static_cast<std::size_t>(truncation)] / truncation;
  t.pass = t.difference < tol;
  return t;
}

double amicales_residual(const StepLaw& walk, const RenewalSequence& u_plus,
                         const DefectiveLaw& descending, double r) {
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("amicales: killing parameter must lie in (0, 1]");
  if (minimal_span(walk) != 1)
    throw precondition_error("amicales: the identity needs a span-1 walk");
  if (!u_plus.source.strict())
    throw input_error(
        "amicales: potential must come from the strict ascending factor");
  const int m = walk.down_reach();
  if (static_cast<int>(u_plus.values.size()) <= m)
    throw precision_error(
        "amicales: potential truncation shorter than the downward reach");

  double worst = 0.0;
  for (int j = 0; j <= m; ++j) {
    double acc = 0.0;
    for (int k = 0; k + j <= m; ++k) {
      acc += u_plus.values[static_cast<std::size_t>(k)] * walk.mass(-(j + k));
    }
    worst = std::max(worst, std::abs(descending.mass(j) - r * acc));
  }
  return worst;
}

ExclusivityCheck killing_exclusivity(const DefectiveLaw& ascending,
                                     const DefectiveLaw& descending,
                                     double tol) {
  ExclusivityCheck c;
  c.observed = std::min(ascending.defect(), descending.defect());
  c.pass = c.observed < tol;
  return c;
}

ExpectationIdentity expectation_identity_check(const StepLaw& walk,
                                               const DefectiveLaw& ascending,
                                               const DefectiveLaw& descending,
                                               double tol) {
  const double step = 1e-5;
  const complex diff =
      (walk.phi(step) - walk.phi(-step)) / complex(2.0 * step, 0.0);
  ExpectationIdentity e;
  e.lhs = diff.imag();

  const double mean = walk.mean();
  if (mean > 1e-12) {
    if (!ascending.is_proper())
      throw precondition_error(
          "expectation identity: positive drift needs a proper ascending factor");
    e.rhs = ascending.mean() * descending.defect();
  } else if (mean < -1e-12) {
    if (!descending.is_proper())
      throw precondition_error(
          "expectation identity: negative drift needs a proper descending factor");
    e.rhs = -ascending.defect() * descending.mean();
  } else {
    if (!ascending.is_proper() || !descending.is_proper())
      throw precondition_error(
          "expectation identity: zero drift needs both factors proper");
    e.rhs = 0.0;
  }
  e.pass = std::abs(e.lhs - e.rhs) <= tol;
  return e;
}

double periodicity_residual(const StepLaw& original, int eta, double r,
                            int grid_size) {
  if (eta < 1) throw parameter_error("periodicity: span must be >= 1");
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("periodicity: killing parameter must lie in (0, 1]");
  const std::vector<double> z = grid_points(grid_size);
  const double shift = 2.0 * M_PI / eta;
  double worst = 0.0;
  for (const double zi : z) {
    worst = std::max(
        worst, std::abs(original.psi_killed(zi + shift, r) -
                        original.psi_killed(zi, r)));
  }
  return worst;
}

FactorisationReport build_report(const StepLaw& original, double r,
                                 const FactorSide& plus,
                                 const FactorSide& minus,
                                 const FactorTransform* ref_plus,
                                 const FactorTransform* ref_minus,
                                 const ReportOptions& opts) {
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("report: killing parameter must lie in (0, 1]");
  const SpanNormalised sn = normalise_span(original);

  FactorisationReport rep;
  rep.killing = r;
  rep.eta = sn.eta;
  rep.grid_size = opts.grid_size;

  const NormalisedPair pair =
      normalise_factor_pair(plus, minus, opts.normalisation_tol);
  rep.scale_c = pair.c;

  const FactorTransform f_plus = FactorTransform::from_side(plus);
  const FactorTransform f_minus = FactorTransform::from_side(minus);
  rep.residual_max =
      factorisation_residual(sn.law, r, f_plus, f_minus, opts.grid_size).max;

  if (ref_plus != nullptr && ref_minus != nullptr) {
    rep.has_ratio = true;
    rep.ratio = ratio_F(f_plus, *ref_plus, f_minus, *ref_minus, opts.grid_size);
  }

  const bool survival_free = r == 1.0;

  try {
    const RenewalSequence ua =
        renewal_sequence(pair.ascending, opts.renewal_truncation);
    const RenewalSequence ud =
        renewal_sequence(pair.descending, opts.renewal_truncation);
    const RenewalLimitCheck ca =
        renewal_limit_check(ua, opts.renewal_window, opts.renewal_tol);
    const RenewalLimitCheck cd =
        renewal_limit_check(ud, opts.renewal_window, opts.renewal_tol);
    rep.renewal = {true, ca.pass && cd.pass, std::max(ca.deviation, cd.deviation)};
  } catch (const precondition_error&) {
    rep.renewal = {false, false, 0.0};
  }

  try {
    const RenewalSequence ua = renewal_sequence(pair.ascending, opts.h_truncation);
    const RenewalSequence ud = renewal_sequence(pair.descending, opts.h_truncation);
    const LatticeH ha = h_sequence(pair.ascending, ua, opts.h_truncation);
    const LatticeH hd = h_sequence(pair.descending, ud, opts.h_truncation);

    double worst_v = 0.0;
    const int start = std::max(1, opts.h_truncation - opts.increment_window);
    for (int k = start; k <= opts.h_truncation; ++k) {
      worst_v = std::max({worst_v,
                          std::abs(ha.increments[static_cast<std::size_t>(k)]),
                          std::abs(hd.increments[static_cast<std::size_t>(k)])});
    }
    rep.decomposition_residual =
        std::max(ha.decomposition_residual, hd.decomposition_residual);
    rep.increments = {true,
                      worst_v < opts.increment_tol &&
                          rep.decomposition_residual < opts.decomposition_tol,
                      worst_v};

    const TailCheck ta = tail_lemma_check(ha, opts.tail_epsilon, opts.tail_tol);
    const TailCheck td = tail_lemma_check(hd, opts.tail_epsilon, opts.tail_tol);
    rep.tail = {true, ta.pass && td.pass, std::max(ta.difference, td.difference)};
    rep.tail_growth = std::max(ta.growth, td.growth);

    const double am = amicales_residual(sn.law, ua, pair.descending, r);
    rep.amicales = {true, am < opts.amicales_tol, am};
  } catch (const precondition_error&) {
    rep.tail = {false, false, 0.0};
    rep.increments = {false, false, 0.0};
    rep.amicales = {false, false, 0.0};
  }

  if (survival_free) {
    const ExclusivityCheck ex =
        killing_exclusivity(pair.ascending, pair.descending);
    rep.killing_excl = {true, ex.pass, ex.observed};
    try {
      const ExpectationIdentity e = expectation_identity_check(
          sn.law, pair.ascending, pair.descending, opts.expectation_tol);
      rep.expectation = {true, e.pass, std::abs(e.lhs - e.rhs)};
    } catch (const precondition_error&) {
      rep.expectation = {false, false, 0.0};
    }
  }

  const double per = periodicity_residual(original, sn.eta, r, opts.grid_size);
  rep.periodicity = {true, per < opts.periodicity_tol, per};

  return rep;
}

}  // namespace whlab
