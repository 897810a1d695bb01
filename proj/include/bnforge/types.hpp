#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bnforge {

enum class Severity { Error, Warning, Info };

inline const char* to_string(Severity s) {
    switch (s) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Info: return "info";
    }
    return "?";
}

/// Ordered set of state labels for one discrete variable.
///
/// `ordered` marks the listed order as semantically meaningful (required for
/// any variable referenced by a monotonicity constraint).
struct StateSpace {
    std::vector<std::string> states;
    bool ordered = false;

    std::size_t size() const { return states.size(); }

    std::optional<std::size_t> index_of(const std::string& label) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == label) return i;
        return std::nullopt;
    }

    bool operator==(const StateSpace&) const = default;
};

struct Variable {
    std::string name;
    StateSpace space;
    std::string class_ref;   // empty = none
    std::string description; // free text

    bool operator==(const Variable&) const = default;
};

/// An assignment of a state to each of a set of variables.
using Evidence = std::map<std::string, std::string>;

} // namespace bnforge
