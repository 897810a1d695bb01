#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnforge/inference.hpp"
#include "bnforge/kb.hpp"
#include "bnforge/network.hpp"

namespace bnforge {

struct TestCase {
    Evidence assignments; // exactly the scenario's evidence variables
    bool operator==(const TestCase&) const = default;
};

/// Exhaustive mode: full Cartesian product of the allowed states in
/// lexicographic order (evidence variables in scenario order, states in
/// state-space order). Sampled mode: n distinct cases drawn with the seeded
/// generator; with the `outside` flag, cases are drawn from the complement
/// of the allowed product (the scenario's "unanticipated conditions").
/// Throws RefError/Error on unknown variables, states outside the space, or
/// an empty case space.
std::vector<TestCase> generate_cases(const ScenarioDecl& scenario, const CompiledNetwork& net);

/// Distinct cases divided by the size of the scenario's instance space
/// (the allowed product; its complement for outside-flagged scenarios).
double coverage(const ScenarioDecl& scenario, const CompiledNetwork& net,
                const std::vector<TestCase>& cases);

struct CaseResult {
    Evidence assignments;
    bool impossible = false;
    double evidence_probability = 0.0;
    double conflict_bits = 0.0;
    std::map<std::string, Marginal> focus;
};

struct RunResults {
    std::string scenario;
    std::vector<CaseResult> cases;
};

RunResults run_cases(const CompiledNetwork& net, const ScenarioDecl& scenario,
                     const std::vector<TestCase>& cases);

} // namespace bnforge
