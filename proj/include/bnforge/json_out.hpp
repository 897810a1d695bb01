#pragma once

// Machine-readable renderings (stable key order) for every CLI surface.

#include <string>

#include "bnforge/compose.hpp"
#include "bnforge/conflict.hpp"
#include "bnforge/constraints.hpp"
#include "bnforge/golden.hpp"
#include "bnforge/importance.hpp"
#include "bnforge/kb.hpp"
#include "bnforge/network.hpp"
#include "bnforge/review.hpp"
#include "bnforge/scenario.hpp"
#include "bnforge/version_store.hpp"

namespace bnforge {

std::string network_to_json(const CompiledNetwork& net);
std::string validation_to_json(const ValidationReport& report, const ConstraintReport* constraints);
std::string review_to_json(const std::vector<ReviewFinding>& findings);
std::string marginals_to_json(const std::map<std::string, Marginal>& marginals,
                              const Evidence& evidence, double evidence_prob);
std::string importance_to_json(const ImportanceResult& result);
std::string synergy_to_json(const std::vector<SynergyEntry>& entries, const std::string& focus);
std::string conflict_to_json(const ConflictScore& score, const Evidence& evidence);
std::string cases_to_json(const std::vector<TestCase>& cases, const std::string& scenario,
                          double coverage_value);
std::string run_results_to_json(const RunResults& results);
std::string regression_to_json(const RegressionReport& report, double tol);
std::string diff_to_json(const KbDiff& diff);
std::string log_to_json(const std::vector<KbVersion>& entries);

} // namespace bnforge
