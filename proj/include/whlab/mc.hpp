#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "whlab/lattice.hpp"

namespace whlab {

// ===========================================================================
// Monte Carlo route: ladder laws by direct simulation
// ===========================================================================
//
// Third, fully independent route to the ladder laws: run the walk until it
// crosses, tally heights.  Per-step geometric killing realises the killed
// transforms.  Sampling is split over 64 fixed streams whose seeds depend
// only on the master seed, so results are identical for any worker count.

inline constexpr const char* kGeneratorId = "splitmix64";
inline constexpr int kStreamCount = 64;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::uint64_t stream_seed(std::uint64_t seed, int stream);

enum class SampleOutcome { Value, Killed, Censored };

struct LadderSample {
  SampleOutcome outcome = SampleOutcome::Value;
  int value = 0;        // ladder height; magnitude for the descending kind
  long long epoch = 0;  // steps begun before the sample resolved
};

// Draws ladder epochs of a fixed walk.  The step cdf is precomputed once so
// the per-step cost is one or two generator calls plus a binary search.
class LadderSimulator {
 public:
  // Requires 0 < r <= 1 and t_max >= 1.  At r = 1 no kill draws are made,
  // which keeps the draw sequence aligned with the unkilled walk.
  LadderSimulator(const StepLaw& law, LadderKind kind, double r,
                  long long t_max);

  LadderSample next(SplitMix64& rng) const;

 private:
  std::vector<int> values_;
  std::vector<double> cum_;
  LadderKind kind_;
  double r_;
  long long t_max_;
};

struct SimulationConfig {
  LadderKind kind = LadderKind::StrictAscending;
  double killing = 1.0;
  long long samples = 0;
  std::uint64_t seed = 1;
  long long t_max = 1000000;
  int threads = 0;  // 0 = hardware concurrency, capped at the stream count
};

struct EmpiricalLaw {
  std::map<int, long long> counts;
  long long delta_count = 0;     // killed before the ladder epoch
  long long censored_count = 0;  // unresolved at t_max
  long long n = 0;
  LadderKind kind = LadderKind::StrictAscending;
  double killing = 1.0;
  std::uint64_t seed = 0;
  long long t_max = 0;

  double p(int k) const;
  // Killed and censored mass folded together, so pmf plus this defect sums
  // to 1 and the record round-trips as a valid ladder law.
  double defect_reported() const;
  double censored_fraction() const;
  // 99% normal-approximation half-width of p(k).
  double half_width(int k) const;
  DefectiveLaw as_law() const;
};

EmpiricalLaw simulate_empirical(const StepLaw& law,
                                const SimulationConfig& config);

struct AtomComparison {
  int k = 0;  // lattice point; -1 denotes the defect cell
  double empirical = 0.0;
  double exact = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct LawComparison {
  std::vector<AtomComparison> atoms;
  bool atoms_pass = false;
  double chi_square = 0.0;
  double threshold = 0.0;
  int cells = 0;
  bool chi_square_pass = false;
  bool pass = false;
};

// Per-atom 99% intervals widened by the censored fraction, plus an aggregate
// chi-square over the cells with expected count >= 10 against the 99%
// Wilson-Hilferty quantile.
LawComparison compare_laws(const EmpiricalLaw& empirical,
                           const DefectiveLaw& exact);

}  // namespace whlab
