#pragma once

#include <string>
#include <vector>

#include "bnforge/compose.hpp"
#include "bnforge/kb.hpp"
#include "bnforge/network.hpp"

namespace bnforge {

struct ReviewFinding {
    std::string rule; // "R1".."R7", stable across versions
    Severity severity = Severity::Error;
    SourceSpan location;
    std::string message;
};

/// Elicitation-review lints over a parsed KB:
///   R1 same variable name used with differing state spaces (or against the
///      definition registry)
///   R2 unnormalized explicit rows / partition distributions
///   R3 identical explicit rows not grouped by a declared partition
///      (possible accidental equality); empty partition rationale (info)
///   R4 declared-constraint violations (needs compiled network)
///   R5 dangling references (scenarios, constraints, composition)
///   R6 stub inventory (info)
///   R7 class-hierarchy cycles and unused classes
/// Findings are sorted by (file, line, rule).
std::vector<ReviewFinding> elicitation_review(
    const KnowledgeBase& kb, const CompiledNetwork* compiled = nullptr,
    const std::vector<std::pair<Constraint, SourceSpan>>* constraints = nullptr);

} // namespace bnforge
