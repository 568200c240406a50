#pragma once

#include <string>

#include <json.hpp>

#include "whlab/mc.hpp"
#include "whlab/renewal.hpp"
#include "whlab/uniqueness.hpp"

namespace whlab::io {

// All readers throw input_error for unreadable files, malformed JSON, or
// records that violate the documented schemas; law constructors add their
// own validation on top.

nlohmann::json read_json_file(const std::string& path);

// Writes via a sibling temp file and rename, so a crash cannot leave a
// half-written target behind.
void write_atomic(const std::string& path, const std::string& content);

// Walk file: {"pmf": {"<int>": mass, ...}, "span_check": bool?}.  With
// span_check true the support must have gcd 1.
StepLaw step_law_from_json(const nlohmann::json& j);
StepLaw load_step_law(const std::string& path);

// Ladder law record: {"pmf": {...}, "defect": q?, "strict": bool}.  This is
// the strict parse used for simulation outputs; masses plus defect must form
// a law.
DefectiveLaw ladder_from_json(const nlohmann::json& j);
nlohmann::json ladder_to_json(const DefectiveLaw& law);

// Lenient parse of one side of a candidate factor pair: same schema as a
// ladder record, but sums are unconstrained so scaled pairs load cleanly.
FactorSide factor_side_from_json(const nlohmann::json& j);

struct FactorFile {
  FactorSide ascending;
  FactorSide descending;
  double killing = 1.0;
  int eta = 1;
};

FactorFile load_factor_file(const std::string& path);

nlohmann::json factor_pair_to_json(const DefectiveLaw& ascending,
                                   const DefectiveLaw& descending,
                                   double killing, int eta);

nlohmann::json report_to_json(const FactorisationReport& report);

nlohmann::json empirical_to_json(const EmpiricalLaw& empirical);

// k,u,h,v rows for the ascending profile; v at k = 0 is zero by convention.
void write_profile_csv(const std::string& path, const RenewalSequence& u,
                       const LatticeH& h);

}  // namespace whlab::io
