#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bnforge/kb.hpp"

namespace bnforge {

/// Feature set of a class after walking the is-a chain, nearest ancestor
/// wins per feature. `*_from` names the class that supplied each feature.
struct ResolvedFeatures {
    std::optional<StateSpace> states;
    std::string states_from;
    std::optional<CptSpec> default_cpt;
    std::string default_cpt_from;
    std::optional<std::string> description;
    std::string description_from;
    std::vector<ClassConstraint> constraints;
    std::string constraints_from;
};

/// Throws RefError if the class is unknown or the is-a chain has a cycle.
ResolvedFeatures resolve_class(const std::string& class_name,
                               const std::vector<ClassDecl>& hierarchy);

/// True when `cls` is `ancestor` or inherits from it.
bool class_is_a(const std::string& cls, const std::string& ancestor,
                const std::vector<ClassDecl>& hierarchy);

} // namespace bnforge
