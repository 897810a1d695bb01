#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnforge/inference.hpp"
#include "bnforge/network.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

struct ImportanceEntry {
    std::string variable;
    double importance = 0.0; // I(F;E|base) >= 0
    double score = 0.0;      // 100 * I / I_max (0 when all I are 0)
    int rank = 0;            // 1-based after sorting
};

struct ImportanceResult {
    std::string focus;
    Evidence base;
    std::vector<ImportanceEntry> entries; // sorted by importance desc, name tie-break
};

/// Importance values below this are floating-point noise from an exactly
/// independent variable and are clamped to 0 (so they score 0 and tie-break
/// by name).
constexpr double kImportanceZero = 1e-12;

/// One-at-a-time importance of each evidence variable for the focus
/// variable, by expected squared change of the focus posterior:
///   I(F;E|base) = sum_e P(e|base) * sum_f (P(f|e,base) - P(f|base))^2
/// Evidence states with P(e|base) = 0 contribute 0.
ImportanceResult importance(const CompiledNetwork& net, const std::string& focus,
                            const std::vector<std::string>& evidence_vars, const Evidence& base);

struct SynergyEntry {
    std::vector<std::string> combination; // sorted by name
    double joint_importance = 0.0;
    double synergy = 0.0; // joint I minus the sum of the single I values
};

/// Samples n distinct size-k combinations of the evidence variables
/// (all of them when n >= C(|vars|,k)) and scores each combination's joint
/// state space as one compound evidence variable.
std::vector<SynergyEntry> synergy_sample(const CompiledNetwork& net, const std::string& focus,
                                         const std::vector<std::string>& evidence_vars,
                                         std::size_t k, std::size_t n, std::uint64_t seed);

/// Figure-style text report: asterisk bar, score column ("0+" for scores in
/// (0,1)), name; entries in rank order.
std::string render_importance_report(const ImportanceResult& result);

} // namespace bnforge
