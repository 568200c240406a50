#include "whlab/spitzer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace whlab {

namespace {

double series_bound(double r, int horizon) {
  return std::exp(1.0) * std::pow(r, horizon + 1) /
         ((horizon + 1) * (1.0 - r));
}

void require_killed(double r) {
  if (!(r > 0.0) || !(r < 1.0))
    throw parameter_error("series route: killing parameter must lie in (0, 1)");
}

// Coefficients of exp(-ell(x)) up to degree k_max, where ell is the
// polynomial with ell[j] multiplying x^j.  Standard power-series recursion:
// E_0 = e^{-ell_0}, k E_k = -sum_{j=1}^{k} j ell_j E_{k-j}.
std::vector<double> exp_of_negative(const std::vector<double>& ell, int k_max) {
  std::vector<double> e(static_cast<std::size_t>(k_max) + 1, 0.0);
  e[0] = std::exp(-ell[0]);
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0.0;
    const int j_top = std::min<int>(k, static_cast<int>(ell.size()) - 1);
    for (int j = 1; j <= j_top; ++j) {
      acc += static_cast<double>(j) * ell[static_cast<std::size_t>(j)] *
             e[static_cast<std::size_t>(k - j)];
    }
    e[static_cast<std::size_t>(k)] = -acc / k;
  }
  return e;
}

// Turns exp-series coefficients into a ladder law.  The transform is
// E_0 + sum_{k>=1} E_k x^k = (1 - beta_0) - sum_{k>=1} beta_k x^k, so
// beta_0 = 1 - E_0 and beta_k = -E_k.  Truncation dust may push individual
// coefficients slightly out of [0, 1]; anything within the series bound is
// clamped, anything beyond it is a genuine failure.  Positive dust below
// kAtomFloor is roundoff, not mass, and gets folded into the defect.
DefectiveLaw law_from_series(const std::vector<double>& e, bool strict,
                             double bound) {
  constexpr double kAtomFloor = 1e-15;
  const double slack = bound + 1e-9;
  std::map<int, double> masses;
  double total = 0.0;
  const double atom0 = 1.0 - e[0];
  if (!strict) {
    if (atom0 < -slack || atom0 > 1.0 + slack)
      throw precision_error("series route: atom at 0 outside [0, 1]");
    if (atom0 > kAtomFloor) {
      masses[0] = atom0;
      total += atom0;
    }
  } else if (std::abs(atom0) > slack) {
    throw precision_error("series route: strict factor grew an atom at 0");
  }
  for (std::size_t k = 1; k < e.size(); ++k) {
    const double b = -e[k];
    if (b < -slack) {
      std::ostringstream os;
      os << "series route: coefficient " << b << " at " << k
         << " below zero beyond the error bound " << bound;
      throw precision_error(os.str());
    }
    if (b > kAtomFloor) {
      masses[static_cast<int>(k)] = b;
      total += b;
    }
  }
  double defect = 1.0 - total;
  if (defect < -slack)
    throw precision_error("series route: masses exceed 1 beyond the error bound");
  if (defect < 0.0) {
    for (auto& [k, b] : masses) b /= total;
    defect = 0.0;
  }
  return DefectiveLaw(masses, defect, strict);
}

}  // namespace

ConvolutionPowerTable::ConvolutionPowerTable(const StepLaw& law, int horizon)
    : m_(law.down_reach()), n_(law.up_reach()), horizon_(horizon) {
  if (horizon < 1)
    throw parameter_error("convolution table: horizon must be >= 1");
  const long long reach =
      static_cast<long long>(horizon) * std::max(m_, n_);
  if (reach > kMaxLatticePoint) {
    std::ostringstream os;
    os << "convolution table: horizon " << horizon
       << " pushes the support past the lattice bound";
    throw precondition_error(os.str());
  }

  std::vector<double> step(static_cast<std::size_t>(m_ + n_) + 1, 0.0);
  for (int k = -m_; k <= n_; ++k)
    step[static_cast<std::size_t>(k + m_)] = law.mass(k);

  rows_.reserve(static_cast<std::size_t>(horizon));
  rows_.push_back(step);
  for (int n = 2; n <= horizon; ++n) {
    const std::vector<double>& prev = rows_.back();
    std::vector<double> next(prev.size() + step.size() - 1, 0.0);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (prev[i] == 0.0) continue;
      for (std::size_t j = 0; j < step.size(); ++j) {
        next[i + j] += prev[i] * step[j];
      }
    }
    rows_.push_back(std::move(next));
  }
}

double ConvolutionPowerTable::probability(int n, int k) const {
  if (n < 1 || n > horizon_)
    throw parameter_error("convolution table: step count out of range");
  const long long idx = static_cast<long long>(k) +
                        static_cast<long long>(n) * m_;
  const auto& row = rows_[static_cast<std::size_t>(n - 1)];
  if (idx < 0 || idx >= static_cast<long long>(row.size())) return 0.0;
  return row[static_cast<std::size_t>(idx)];
}

int spitzer_auto_horizon(double r, double target) {
  require_killed(r);
  if (!(target > 0.0))
    throw parameter_error("series route: error target must be positive");
  // Closed-form first guess, then settle on the exact threshold.
  int n = 1;
  const double guess =
      std::log(target * (1.0 - r) / std::exp(1.0)) / std::log(r) - 1.0;
  if (guess > 1.0) n = static_cast<int>(guess);
  while (n > 1 && series_bound(r, n - 1) < target) --n;
  while (series_bound(r, n) >= target) ++n;
  return n;
}

SpitzerFactor spitzer_factor(const StepLaw& law, double r, LadderKind kind,
                             int horizon) {
  require_killed(r);
  if (horizon == 0) horizon = spitzer_auto_horizon(r);
  if (horizon < 1) throw parameter_error("series route: horizon must be >= 1");
  const ConvolutionPowerTable table(law, horizon);
  const double bound = series_bound(r, horizon);

  const bool ascending = kind == LadderKind::StrictAscending;
  const int reach = ascending ? law.up_reach() : law.down_reach();
  const int k_max = horizon * reach;

  // ell[j] = sum_n (r^n / n) P(S_n = j) over the strictly positive part for
  // the ascending factor, or P(S_n = -j) including j = 0 for the weak
  // descending one.
  std::vector<double> ell(static_cast<std::size_t>(k_max) + 1, 0.0);
  double weight = 1.0;
  for (int n = 1; n <= horizon; ++n) {
    weight *= r;
    const double w = weight / n;
    if (ascending) {
      const int top = std::min(k_max, n * law.up_reach());
      for (int k = 1; k <= top; ++k)
        ell[static_cast<std::size_t>(k)] += w * table.probability(n, k);
    } else {
      const int top = std::min(k_max, n * law.down_reach());
      for (int j = 0; j <= top; ++j)
        ell[static_cast<std::size_t>(j)] += w * table.probability(n, -j);
    }
  }

  const std::vector<double> e = exp_of_negative(ell, k_max);
  return SpitzerFactor{law_from_series(e, ascending, bound), bound, horizon};
}

SpitzerPair spitzer_pair(const StepLaw& law, double r, int horizon) {
  if (horizon == 0) horizon = spitzer_auto_horizon(r);
  return SpitzerPair{
      spitzer_factor(law, r, LadderKind::StrictAscending, horizon),
      spitzer_factor(law, r, LadderKind::WeakDescending, horizon)};
}

}  // namespace whlab
