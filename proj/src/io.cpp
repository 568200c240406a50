#include "whlab/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

namespace whlab::io {

namespace {

using nlohmann::json;

std::map<int, double> pmf_from_json(const json& j, const char* what) {
  if (!j.is_object()) {
    std::ostringstream os;
    os << what << ": pmf must be an object of lattice point -> mass";
    throw input_error(os.str());
  }
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) {
    int k = 0;
    const char* end = key.data() + key.size();
    const auto [ptr, ec] = std::from_chars(key.data(), end, k);
    if (ec != std::errc() || ptr != end) {
      std::ostringstream os;
      os << what << ": lattice key '" << key << "' is not a decimal integer";
      throw input_error(os.str());
    }
    if (!value.is_number()) {
      std::ostringstream os;
      os << what << ": mass at " << key << " is not a number";
      throw input_error(os.str());
    }
    out[k] = value.get<double>();
  }
  return out;
}

json pmf_to_json(const std::map<int, double>& pmf) {
  json j = json::object();
  for (const auto& [k, v] : pmf) j[std::to_string(k)] = v;
  return j;
}

double number_field(const json& j, const char* name, const char* what) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_number()) {
    std::ostringstream os;
    os << what << ": missing numeric field '" << name << "'";
    throw input_error(os.str());
  }
  return it->get<double>();
}

bool bool_field(const json& j, const char* name, const char* what) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_boolean()) {
    std::ostringstream os;
    os << what << ": missing boolean field '" << name << "'";
    throw input_error(os.str());
  }
  return it->get<bool>();
}

json lemma_to_json(const LemmaOutcome& o) {
  json j;
  j["applicable"] = o.applicable;
  if (o.applicable) {
    j["pass"] = o.pass;
    j["observed"] = o.observed;
  } else {
    j["pass"] = nullptr;
    j["observed"] = nullptr;
  }
  return j;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error("'" + path + "': " + e.what());
  }
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw input_error("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw input_error("cannot replace '" + path + "': " + ec.message());
  }
}

StepLaw step_law_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pmf"))
    throw input_error("walk record: missing 'pmf'");
  StepLaw law(pmf_from_json(j.at("pmf"), "walk record"));
  if (j.contains("span_check")) {
    const auto& flag = j.at("span_check");
    if (!flag.is_boolean())
      throw input_error("walk record: 'span_check' must be a boolean");
    if (flag.get<bool>() && minimal_span(law) != 1)
      throw input_error("walk record: span_check requested but the support has span > 1");
  }
  return law;
}

StepLaw load_step_law(const std::string& path) {
  return step_law_from_json(read_json_file(path));
}

DefectiveLaw ladder_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pmf"))
    throw input_error("ladder record: missing 'pmf'");
  const double defect = j.contains("defect")
                            ? number_field(j, "defect", "ladder record")
                            : 0.0;
  return DefectiveLaw(pmf_from_json(j.at("pmf"), "ladder record"), defect,
                      bool_field(j, "strict", "ladder record"));
}

json ladder_to_json(const DefectiveLaw& law) {
  json j;
  j["pmf"] = pmf_to_json(law.masses());
  j["defect"] = law.defect();
  j["strict"] = law.strict();
  return j;
}

FactorSide factor_side_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pmf"))
    throw input_error("factor record: missing 'pmf'");
  FactorSide side;
  side.pmf = pmf_from_json(j.at("pmf"), "factor record");
  side.defect = j.contains("defect")
                    ? number_field(j, "defect", "factor record")
                    : 0.0;
  side.strict = bool_field(j, "strict", "factor record");
  return side;
}

FactorFile load_factor_file(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_object() || !j.contains("ascending") || !j.contains("descending"))
    throw input_error("'" + path + "': factor file needs 'ascending' and 'descending'");
  FactorFile file;
  file.ascending = factor_side_from_json(j.at("ascending"));
  file.descending = factor_side_from_json(j.at("descending"));
  file.killing = number_field(j, "killing", "factor file");
  if (j.contains("eta")) {
    if (!j.at("eta").is_number_integer())
      throw input_error("factor file: 'eta' must be an integer");
    file.eta = j.at("eta").get<int>();
  }
  return file;
}

json factor_pair_to_json(const DefectiveLaw& ascending,
                         const DefectiveLaw& descending, double killing,
                         int eta) {
  json j;
  j["killing"] = killing;
  j["eta"] = eta;
  j["ascending"] = ladder_to_json(ascending);
  j["descending"] = ladder_to_json(descending);
  return j;
}

json report_to_json(const FactorisationReport& report) {
  json j;
  j["killing"] = report.killing;
  j["eta"] = report.eta;
  j["grid"] = report.grid_size;
  j["residual_max"] = report.residual_max;
  j["c"] = report.scale_c;
  if (report.has_ratio) {
    j["F_mean"] = report.ratio.mean.real();
    j["F_dev"] = report.ratio.dev;
    j["F_cross"] = report.ratio.cross;
  } else {
    j["F_mean"] = nullptr;
    j["F_dev"] = nullptr;
    j["F_cross"] = nullptr;
  }

  json lemmas;
  lemmas["renewal"] = lemma_to_json(report.renewal);
  lemmas["tail"] = lemma_to_json(report.tail);
  if (report.tail.applicable) lemmas["tail"]["growth"] = report.tail_growth;
  lemmas["increments"] = lemma_to_json(report.increments);
  if (report.increments.applicable) {
    lemmas["increments"]["decomposition_residual"] =
        report.decomposition_residual;
  }
  lemmas["killing"] = lemma_to_json(report.killing_excl);
  lemmas["amicales"] = lemma_to_json(report.amicales);
  lemmas["periodicity"] = lemma_to_json(report.periodicity);
  lemmas["expectation"] = lemma_to_json(report.expectation);
  j["lemmas"] = lemmas;

  bool all = true;
  for (const LemmaOutcome* o :
       {&report.renewal, &report.tail, &report.increments, &report.killing_excl,
        &report.amicales, &report.periodicity, &report.expectation}) {
    if (o->applicable && !o->pass) all = false;
  }
  j["lemmas_pass"] = all;
  return j;
}

json empirical_to_json(const EmpiricalLaw& empirical) {
  json j;
  j["generator"] = kGeneratorId;
  j["seed"] = empirical.seed;
  j["samples"] = empirical.n;
  j["killing"] = empirical.killing;
  j["kind"] = empirical.kind == LadderKind::StrictAscending ? "ascending"
                                                            : "descending";
  j["t_max"] = empirical.t_max;
  std::map<int, double> pmf;
  for (const auto& [k, c] : empirical.counts) {
    pmf[k] = static_cast<double>(c) / static_cast<double>(empirical.n);
  }
  j["pmf"] = pmf_to_json(pmf);
  j["defect"] = empirical.defect_reported();
  j["censored"] = empirical.censored_fraction();
  j["strict"] = empirical.kind == LadderKind::StrictAscending;
  return j;
}

void write_profile_csv(const std::string& path, const RenewalSequence& u,
                       const LatticeH& h) {
  if (u.values.size() != h.values.size())
    throw parameter_error("profile csv: potential and profile lengths differ");
  std::ostringstream os;
  os << std::setprecision(17);
  os << "k,u,h,v\n";
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    os << k << ',' << u.values[k] << ',' << h.values[k] << ','
       << h.increments[k] << '\n';
  }
  write_atomic(path, os.str());
}

}  // namespace whlab::io
