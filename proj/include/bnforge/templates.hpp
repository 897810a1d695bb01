#pragma once

#include <map>
#include <optional>
#include <string>

#include "bnforge/kb.hpp"

namespace bnforge {

struct InstantiationResult {
    std::optional<FragmentDecl> fragment; // present iff no error diagnostics
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return fragment.has_value(); }
};

/// Deterministic textual substitution of the template body followed by a
/// parse. Identifier values must be legal bare identifiers; state-range
/// values must be non-empty label lists.
InstantiationResult instantiate_template(
    const TemplateDecl& tmpl, const std::vector<std::pair<std::string, TemplateValue>>& bindings);

} // namespace bnforge
