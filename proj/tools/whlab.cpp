#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "whlab/io.hpp"
#include "whlab/spectral.hpp"
#include "whlab/spitzer.hpp"

namespace {

using namespace whlab;

int env_threads() {
  const char* s = std::getenv("WHLAB_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 0)
    throw parameter_error("WHLAB_THREADS must be a non-negative integer");
  return static_cast<int>(v);
}

void check_grid(int grid) {
  if (grid < 64 || grid > (1 << 16) || (grid & (grid - 1)) != 0)
    throw parameter_error("grid size must be a power of two in [64, 65536]");
}

void emit(const std::string& out_path, const nlohmann::json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    io::write_atomic(out_path, text);
  }
}

int report_exit_code(const FactorisationReport& report, double residual_tol) {
  if (report.residual_max > residual_tol) {
    std::cerr << "error: product residual " << report.residual_max
              << " exceeds tolerance " << residual_tol << "\n";
    return 2;
  }
  const std::pair<const char*, const LemmaOutcome*> checks[] = {
      {"renewal", &report.renewal},     {"tail", &report.tail},
      {"increments", &report.increments}, {"killing", &report.killing_excl},
      {"amicales", &report.amicales},   {"periodicity", &report.periodicity},
      {"expectation", &report.expectation}};
  for (const auto& [name, outcome] : checks) {
    if (outcome->applicable && !outcome->pass) {
      std::cerr << "error: lemma check '" << name << "' failed, observed "
                << outcome->observed << "\n";
      return 4;
    }
  }
  return 0;
}

struct CommonFlags {
  std::string in;
  std::string out;
  double killing = 1.0;
  int grid = 1024;
  double tol = 1e-9;
};

int run_factorise(const CommonFlags& flags, const std::string& route,
                  int horizon) {
  check_grid(flags.grid);
  const StepLaw walk = io::load_step_law(flags.in);
  const SpanNormalised sn = normalise_span(walk);

  std::optional<DefectiveLaw> ascending;
  std::optional<DefectiveLaw> descending;
  if (route == "spectral") {
    Factorisation f = factorise(walk, flags.killing);
    ascending = std::move(f.ascending);
    descending = std::move(f.descending);
  } else {
    SpitzerPair p = spitzer_pair(sn.law, flags.killing, horizon);
    ascending = std::move(p.ascending.law);
    descending = std::move(p.descending.law);
  }

  const ResidualGrid grid = factorisation_residual(
      sn.law, flags.killing, FactorTransform::from_law(*ascending),
      FactorTransform::from_law(*descending), flags.grid);
  if (grid.max > flags.tol) {
    std::ostringstream os;
    os << "route '" << route << "' left residual " << grid.max
       << " above tolerance " << flags.tol;
    throw factorisation_error(os.str());
  }

  nlohmann::json out =
      io::factor_pair_to_json(*ascending, *descending, flags.killing, sn.eta);
  out["residual_max"] = grid.max;
  emit(flags.out, out);
  if (!flags.out.empty()) {
    std::cerr << "wrote " << flags.out << " residual_max=" << grid.max << "\n";
  }
  return 0;
}

int run_verify(const CommonFlags& flags, const std::string& factors_path,
               bool killing_given) {
  check_grid(flags.grid);
  const StepLaw walk = io::load_step_law(flags.in);
  const io::FactorFile file = io::load_factor_file(factors_path);
  const double r = killing_given ? flags.killing : file.killing;

  const Factorisation reference = factorise(walk, r);
  const FactorTransform ref_plus = FactorTransform::from_law(reference.ascending);
  const FactorTransform ref_minus =
      FactorTransform::from_law(reference.descending);

  ReportOptions opts;
  opts.grid_size = flags.grid;
  opts.residual_tol = flags.tol;
  const FactorisationReport report = build_report(
      walk, r, file.ascending, file.descending, &ref_plus, &ref_minus, opts);

  emit(flags.out, io::report_to_json(report));
  // Status goes to stderr so stdout stays a single parseable JSON document.
  std::cerr << "residual_max=" << report.residual_max << " c=" << report.scale_c
            << " F_dev=" << (report.has_ratio ? report.ratio.dev : 0.0) << "\n";
  return report_exit_code(report, flags.tol);
}

int run_simulate(const CommonFlags& flags, const std::string& kind,
                 long long samples, std::uint64_t seed, long long t_max) {
  const StepLaw walk = io::load_step_law(flags.in);
  SimulationConfig config;
  config.kind = kind == "ascending" ? LadderKind::StrictAscending
                                    : LadderKind::WeakDescending;
  config.killing = flags.killing;
  config.samples = samples;
  config.seed = seed;
  config.t_max = t_max;
  config.threads = env_threads();

  const EmpiricalLaw empirical = simulate_empirical(walk, config);
  emit(flags.out, io::empirical_to_json(empirical));
  std::cerr << "samples=" << empirical.n
            << " defect=" << empirical.defect_reported()
            << " censored=" << empirical.censored_fraction() << "\n";
  return 0;
}

int run_lemma_checks(const CommonFlags& flags, int truncation,
                     const std::string& csv_path) {
  check_grid(flags.grid);
  const StepLaw walk = io::load_step_law(flags.in);
  const Factorisation f = factorise(walk, flags.killing);

  // Second route for the ratio statistics where the series converges at a
  // workable horizon; otherwise the report omits them.
  std::optional<FactorTransform> ref_plus;
  std::optional<FactorTransform> ref_minus;
  if (flags.killing < 1.0) {
    try {
      const SpitzerPair p = spitzer_pair(f.rescaled, flags.killing);
      ref_plus = FactorTransform::from_law(p.ascending.law);
      ref_minus = FactorTransform::from_law(p.descending.law);
    } catch (const precondition_error&) {
    }
  }

  ReportOptions opts;
  opts.grid_size = flags.grid;
  opts.residual_tol = flags.tol;
  const FactorisationReport report = build_report(
      walk, flags.killing, side_from_law(f.ascending),
      side_from_law(f.descending), ref_plus ? &*ref_plus : nullptr,
      ref_minus ? &*ref_minus : nullptr, opts);

  if (!csv_path.empty()) {
    const RenewalSequence u = renewal_sequence(f.ascending, truncation);
    const LatticeH h = h_sequence(f.ascending, u, truncation);
    io::write_profile_csv(csv_path, u, h);
  }

  emit(flags.out, io::report_to_json(report));
  return report_exit_code(report, flags.tol);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ladder factorisation laboratory for lattice random walks"};
  app.require_subcommand(1);

  CommonFlags fac_flags;
  std::string fac_route = "spectral";
  int fac_horizon = 0;
  CLI::App* fac = app.add_subcommand(
      "factorise", "Split 1 - r*phi into ascending and descending factors");
  fac->add_option("--in", fac_flags.in, "walk JSON file")->required();
  fac->add_option("--killing", fac_flags.killing, "killing parameter in (0, 1]")
      ->capture_default_str();
  fac->add_option("--factors", fac_route, "route: spectral or spitzer")
      ->check(CLI::IsMember({"spectral", "spitzer"}))
      ->capture_default_str();
  fac->add_option("--trunc", fac_horizon,
                  "series horizon for the spitzer route (0 = automatic)");
  fac->add_option("--grid", fac_flags.grid, "residual grid size")
      ->capture_default_str();
  fac->add_option("--tol", fac_flags.tol, "largest accepted product residual")
      ->capture_default_str();
  fac->add_option("--out", fac_flags.out, "factor file (stdout if omitted)");

  CommonFlags ver_flags;
  std::string ver_factors;
  CLI::App* ver = app.add_subcommand(
      "verify", "Check a candidate factor pair against a walk");
  ver->add_option("--in", ver_flags.in, "walk JSON file")->required();
  ver->add_option("--factors", ver_factors, "candidate factor file")->required();
  CLI::Option* ver_killing =
      ver->add_option("--killing", ver_flags.killing,
                      "killing parameter (defaults to the factor file's)");
  ver->add_option("--grid", ver_flags.grid, "residual grid size")
      ->capture_default_str();
  ver->add_option("--tol", ver_flags.tol, "largest accepted product residual")
      ->capture_default_str();
  ver->add_option("--out", ver_flags.out, "report file (stdout if omitted)");

  CommonFlags sim_flags;
  std::string sim_kind = "ascending";
  long long sim_samples = 0;
  std::uint64_t sim_seed = 1;
  long long sim_tmax = 1000000;
  CLI::App* sim =
      app.add_subcommand("simulate", "Sample a ladder law by simulation");
  sim->add_option("--in", sim_flags.in, "walk JSON file")->required();
  sim->add_option("--kind", sim_kind, "ladder kind")
      ->check(CLI::IsMember({"ascending", "descending"}))
      ->capture_default_str();
  sim->add_option("--killing", sim_flags.killing, "killing parameter in (0, 1]")
      ->capture_default_str();
  sim->add_option("--samples", sim_samples, "number of ladder samples")
      ->required();
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--tmax", sim_tmax, "censoring horizon in steps")
      ->capture_default_str();
  sim->add_option("--out", sim_flags.out, "empirical law file (stdout if omitted)");

  CommonFlags lem_flags;
  int lem_trunc = 512;
  std::string lem_csv;
  CLI::App* lem = app.add_subcommand(
      "lemma-checks", "Factorise a walk and run the structural lemma suite");
  lem->add_option("--in", lem_flags.in, "walk JSON file")->required();
  lem->add_option("--killing", lem_flags.killing, "killing parameter in (0, 1]")
      ->capture_default_str();
  lem->add_option("--grid", lem_flags.grid, "residual grid size")
      ->capture_default_str();
  lem->add_option("--tol", lem_flags.tol, "largest accepted product residual")
      ->capture_default_str();
  lem->add_option("--trunc", lem_trunc, "profile length for the CSV")
      ->capture_default_str();
  lem->add_option("--csv", lem_csv, "write k,u,h,v rows to this file");
  lem->add_option("--out", lem_flags.out, "report file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fac->parsed()) return run_factorise(fac_flags, fac_route, fac_horizon);
    if (ver->parsed())
      return run_verify(ver_flags, ver_factors, ver_killing->count() > 0);
    if (sim->parsed())
      return run_simulate(sim_flags, sim_kind, sim_samples, sim_seed, sim_tmax);
    if (lem->parsed()) return run_lemma_checks(lem_flags, lem_trunc, lem_csv);
  } catch (const whlab::factorisation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const whlab::normalisation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const whlab::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
