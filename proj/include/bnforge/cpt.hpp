#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bnforge/types.hpp"

namespace bnforge {

/// One position of a parent-configuration pattern: a wildcard, or an
/// explicit set of state labels of that parent.
struct PatternTerm {
    bool wildcard = false;
    std::vector<std::string> states; // nonempty iff !wildcard

    bool operator==(const PatternTerm&) const = default;
};

/// A pattern tuple, one term per parent. Denotes the set of parent
/// configurations matching every term.
using ConfigPattern = std::vector<PatternTerm>;

/// Explicit table: one row per parent configuration, keyed by state labels.
/// A prior is the degenerate case with a single empty-config row.
struct ExplicitCpt {
    struct Row {
        std::vector<std::string> config; // one label per parent
        std::vector<double> probs;       // one entry per child state
        bool operator==(const Row&) const = default;
    };
    std::vector<Row> rows;

    bool operator==(const ExplicitCpt&) const = default;
};

/// Partition of the parent configuration space: each element groups the
/// configurations sharing one distribution, with a recorded rationale.
struct PartitionCpt {
    struct Element {
        std::vector<ConfigPattern> patterns;
        std::string rationale;
        std::vector<double> dist;
        bool operator==(const Element&) const = default;
    };
    std::vector<Element> elements;

    bool operator==(const PartitionCpt&) const = default;
};

/// Leaky noisy-OR over boolean parents. State index 0 of the child and of
/// every parent is the effect-present ("true") state:
///   P(child = true | x) = 1 - (1-leak) * prod_{i: x_i = true} (1 - link[i])
struct NoisyOrCpt {
    std::vector<double> link; // one per parent, in [0,1]
    double leak = 0.0;        // in [0,1]

    bool operator==(const NoisyOrCpt&) const = default;
};

/// Function table: each parent configuration maps to exactly one child state.
struct DeterministicCpt {
    struct Rule {
        ConfigPattern pattern;
        std::string output; // child state label
        bool operator==(const Rule&) const = default;
    };
    std::vector<Rule> rules;

    bool operator==(const DeterministicCpt&) const = default;
};

using CptSpec = std::variant<ExplicitCpt, PartitionCpt, NoisyOrCpt, DeterministicCpt>;

enum class CptForm { Explicit, Partition, NoisyOr, Deterministic };

CptForm form_of(const CptSpec& spec);
const char* to_string(CptForm f);

/// Fully expanded table: rows in lexicographic parent-configuration order
/// (first parent most significant, states in state-space order), one
/// probability vector over the child states per row.
using CptTable = std::vector<std::vector<double>>;

/// Number of parent configurations (product of the parent arities).
std::size_t config_count(const std::vector<StateSpace>& parents);

/// Decode row index -> per-parent state indices, lexicographic order.
std::vector<std::size_t> decode_config(std::size_t row, const std::vector<StateSpace>& parents);

/// Encode per-parent state indices -> row index.
std::size_t encode_config(const std::vector<std::size_t>& idx, const std::vector<StateSpace>& parents);

/// Expand a CPT spec against concrete child/parent spaces.
/// Throws ExpandError on non-covering or overlapping partitions, noisy-OR on
/// non-boolean spaces, and structurally malformed specs. Row normalization is
/// NOT enforced here; validate_network reports it as a finding.
CptTable expand_cpt(const CptSpec& spec, const StateSpace& child,
                    const std::vector<StateSpace>& parents);

} // namespace bnforge
