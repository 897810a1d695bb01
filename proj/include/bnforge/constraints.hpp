#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bnforge/network.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

enum class Direction { NonIncreasing, NonDecreasing };
enum class Relation { Less, LessEqual };

inline const char* to_string(Direction d) {
    return d == Direction::NonIncreasing ? "nonincreasing" : "nondecreasing";
}
inline const char* to_string(Relation r) { return r == Relation::Less ? "<" : "<="; }

/// P(child = target_state | parent, rest) must be monotone along the
/// (ordered) parent's state order, for every configuration of the remaining
/// parents.
struct MonotoneConstraint {
    std::string child;
    std::string target_state;
    std::string parent;
    Direction direction = Direction::NonIncreasing;

    bool operator==(const MonotoneConstraint&) const = default;
};

/// P(child = target_state | config_a) REL P(child = target_state | config_b),
/// where each config assigns a state to every parent of child.
struct InequalityConstraint {
    std::string child;
    std::string target_state;
    Evidence config_a;
    Evidence config_b;
    Relation relation = Relation::Less;

    bool operator==(const InequalityConstraint&) const = default;
};

using Constraint = std::variant<MonotoneConstraint, InequalityConstraint>;

struct ConstraintViolation {
    std::size_t constraint_index = 0;
    std::string child;
    std::string message;
    double value_a = 0.0;
    double value_b = 0.0;
};

struct ConstraintReport {
    std::vector<ConstraintViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every constraint against the expanded tables. Lists every
/// violating configuration pair. Throws RefError on unresolvable references
/// or a monotone constraint over an unordered parent space.
ConstraintReport check_constraints(const CompiledNetwork& net,
                                   const std::vector<Constraint>& constraints);

} // namespace bnforge
