#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnforge/cpt.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

/// Flat Bayesian network: every CPT fully expanded, variables in canonical
/// (topological, name-tie-broken) order.
struct CompiledNetwork {
    struct Provenance {
        std::string fragment; // home fragment name, or "(exogenous)"
        CptForm form = CptForm::Explicit;
        bool operator==(const Provenance&) const = default;
    };

    std::vector<Variable> variables;
    std::map<std::string, std::vector<std::string>> parents;
    std::map<std::string, CptTable> cpts;
    std::map<std::string, Provenance> provenance;

    const Variable* find(const std::string& name) const {
        for (const auto& v : variables)
            if (v.name == name) return &v;
        return nullptr;
    }

    bool operator==(const CompiledNetwork&) const = default;
};

struct ValidationFinding {
    Severity severity = Severity::Error;
    std::string subject; // variable name or "" for network-level findings
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    bool ok() const { return findings.empty(); }
};

/// Checks acyclicity, CPT dimensions, row normalization (1e-9), probability
/// ranges and state-space invariants. Findings are data, not failures.
ValidationReport validate_network(const CompiledNetwork& net);

constexpr double kRowSumTolerance = 1e-9;

} // namespace bnforge
