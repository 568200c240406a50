#include "whlab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace whlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr double kZ99TwoSided = 2.576;
constexpr double kZ99OneSided = 2.3263;

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, int stream) {
  if (stream < 0 || stream >= kStreamCount)
    throw parameter_error("stream seed: stream index out of range");
  SplitMix64 g(seed + static_cast<std::uint64_t>(stream) * kGolden);
  return g.next();
}

LadderSimulator::LadderSimulator(const StepLaw& law, LadderKind kind, double r,
                                 long long t_max)
    : kind_(kind), r_(r), t_max_(t_max) {
  if (!(r > 0.0) || r > 1.0)
    throw parameter_error("simulator: killing parameter must lie in (0, 1]");
  if (t_max < 1) throw parameter_error("simulator: t_max must be >= 1");
  double acc = 0.0;
  for (const auto& [k, p] : law.as_map()) {
    values_.push_back(k);
    acc += p;
    cum_.push_back(acc);
  }
  cum_.back() = 1.0;  // guard against rounding in the final bucket
}

LadderSample LadderSimulator::next(SplitMix64& rng) const {
  long long position = 0;
  for (long long t = 1; t <= t_max_; ++t) {
    if (r_ < 1.0 && rng.uniform() >= r_) {
      return LadderSample{SampleOutcome::Killed, 0, t};
    }
    const double u = rng.uniform();
    const std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
    position += values_[std::min(idx, values_.size() - 1)];
    if (kind_ == LadderKind::StrictAscending) {
      if (position > 0)
        return LadderSample{SampleOutcome::Value, static_cast<int>(position), t};
    } else {
      if (position <= 0)
        return LadderSample{SampleOutcome::Value, static_cast<int>(-position), t};
    }
  }
  return LadderSample{SampleOutcome::Censored, 0, t_max_};
}

namespace {

struct StreamTally {
  std::map<int, long long> counts;
  long long delta = 0;
  long long censored = 0;
};

void run_stream(const LadderSimulator& sim, std::uint64_t seed, int stream,
                long long samples, StreamTally& tally) {
  SplitMix64 rng(stream_seed(seed, stream));
  for (long long i = 0; i < samples; ++i) {
    const LadderSample s = sim.next(rng);
    switch (s.outcome) {
      case SampleOutcome::Value:
        ++tally.counts[s.value];
        break;
      case SampleOutcome::Killed:
        ++tally.delta;
        break;
      case SampleOutcome::Censored:
        ++tally.censored;
        break;
    }
  }
}

}  // namespace

EmpiricalLaw simulate_empirical(const StepLaw& law,
                                const SimulationConfig& config) {
  if (config.samples < 1)
    throw parameter_error("simulate: sample count must be >= 1");
  const LadderSimulator sim(law, config.kind, config.killing, config.t_max);

  // Fixed assignment of samples to streams, independent of the worker count.
  std::vector<long long> stream_samples(kStreamCount, config.samples / kStreamCount);
  for (int s = 0; s < static_cast<int>(config.samples % kStreamCount); ++s) {
    ++stream_samples[static_cast<std::size_t>(s)];
  }

  int workers = config.threads;
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, kStreamCount);

  std::vector<StreamTally> tallies(kStreamCount);
  if (workers == 1) {
    for (int s = 0; s < kStreamCount; ++s) {
      run_stream(sim, config.seed, s, stream_samples[static_cast<std::size_t>(s)],
                 tallies[static_cast<std::size_t>(s)]);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int s = w; s < kStreamCount; s += workers) {
          run_stream(sim, config.seed, s,
                     stream_samples[static_cast<std::size_t>(s)],
                     tallies[static_cast<std::size_t>(s)]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  EmpiricalLaw emp;
  emp.n = config.samples;
  emp.kind = config.kind;
  emp.killing = config.killing;
  emp.seed = config.seed;
  emp.t_max = config.t_max;
  for (const StreamTally& tally : tallies) {
    for (const auto& [k, c] : tally.counts) emp.counts[k] += c;
    emp.delta_count += tally.delta;
    emp.censored_count += tally.censored;
  }
  return emp;
}

double EmpiricalLaw::p(int k) const {
  auto it = counts.find(k);
  if (it == counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(n);
}

double EmpiricalLaw::defect_reported() const {
  return static_cast<double>(delta_count + censored_count) /
         static_cast<double>(n);
}

double EmpiricalLaw::censored_fraction() const {
  return static_cast<double>(censored_count) / static_cast<double>(n);
}

double EmpiricalLaw::half_width(int k) const {
  const double ph = p(k);
  return kZ99TwoSided * std::sqrt(ph * (1.0 - ph) / static_cast<double>(n));
}

DefectiveLaw EmpiricalLaw::as_law() const {
  std::map<int, double> masses;
  for (const auto& [k, c] : counts) {
    masses[k] = static_cast<double>(c) / static_cast<double>(n);
  }
  return DefectiveLaw(masses, defect_reported(),
                      kind == LadderKind::StrictAscending);
}

LawComparison compare_laws(const EmpiricalLaw& empirical,
                           const DefectiveLaw& exact) {
  const double n = static_cast<double>(empirical.n);
  const double censored = empirical.censored_fraction();

  std::set<int> keys;
  for (const auto& [k, c] : empirical.counts) keys.insert(k);
  for (const auto& [k, b] : exact.masses()) keys.insert(k);

  LawComparison cmp;
  cmp.atoms_pass = true;
  double chi = 0.0;
  int cells = 0;

  auto add_cell = [&](int k, double ph, double pe) {
    const double se_hat = std::sqrt(ph * (1.0 - ph) / n);
    const double se_exact = std::sqrt(pe * (1.0 - pe) / n);
    const double tol = kZ99TwoSided * std::max(se_hat, se_exact) + censored;
    const bool pass = std::abs(ph - pe) <= tol;
    cmp.atoms.push_back(AtomComparison{k, ph, pe, tol, pass});
    cmp.atoms_pass = cmp.atoms_pass && pass;
    if (n * pe >= 10.0 && pe < 1.0) {
      const double z = std::max(0.0, std::abs(ph - pe) - censored) / se_exact;
      chi += z * z;
      ++cells;
    }
  };

  for (const int k : keys) add_cell(k, empirical.p(k), exact.mass(k));
  add_cell(-1, empirical.defect_reported(), exact.defect());

  cmp.chi_square = chi;
  cmp.cells = cells;
  if (cells > 0) {
    const double k = static_cast<double>(cells);
    const double w = 1.0 - 2.0 / (9.0 * k) +
                     kZ99OneSided * std::sqrt(2.0 / (9.0 * k));
    cmp.threshold = k * w * w * w;
    cmp.chi_square_pass = chi < cmp.threshold;
  } else {
    cmp.threshold = 0.0;
    cmp.chi_square_pass = true;
  }
  cmp.pass = cmp.atoms_pass && cmp.chi_square_pass;
  return cmp;
}

}  // namespace whlab
