#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnforge/factor.hpp"
#include "bnforge/network.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

struct Marginal {
    std::string variable;
    std::vector<std::string> state_labels;
    std::vector<double> probabilities; // parallel to state_labels, space order
};

/// Exact posterior marginals via variable elimination (min-fill ordering,
/// ties broken by variable name). Throws ZeroProbabilityEvidence when
/// P(evidence) = 0 and RefError on unknown variables/states.
std::map<std::string, Marginal> posterior(const CompiledNetwork& net, const Evidence& evidence,
                                          const std::vector<std::string>& targets);

/// Exact P(evidence); P(empty) = 1.
double evidence_probability(const CompiledNetwork& net, const Evidence& evidence);

/// Joint posterior over `targets` as a single factor (used for compound
/// evidence in synergy analysis). Variables appear in ascending network
/// index order.
Factor joint_posterior(const CompiledNetwork& net, const Evidence& evidence,
                       const std::vector<std::string>& targets);

/// Independent test oracle: full joint enumeration. Same contract as
/// posterior. Throws TooLargeForOracle when the joint state space exceeds
/// 10^6 configurations.
std::map<std::string, Marginal> brute_force_posterior(const CompiledNetwork& net,
                                                      const Evidence& evidence,
                                                      const std::vector<std::string>& targets);

/// Enumeration counterpart of evidence_probability (same guard).
double brute_force_evidence_probability(const CompiledNetwork& net, const Evidence& evidence);

constexpr std::size_t kOracleStateLimit = 1000000;

/// Index-based view of a network used by the engines. Exposed for tests
/// that need a custom elimination order.
struct IndexedNetwork {
    const CompiledNetwork* net;
    std::map<std::string, int> index;
    std::vector<std::vector<int>> parent_idx; // per variable
    std::vector<Factor> cpt_factors;

    explicit IndexedNetwork(const CompiledNetwork& n);
    int require(const std::string& name) const;
};

/// Variable elimination with an explicit elimination order (every
/// non-target, non-evidence variable exactly once). Returns the
/// unnormalized joint factor over the targets.
Factor eliminate(const IndexedNetwork& ix, const Evidence& evidence,
                 const std::vector<int>& targets, const std::vector<int>& order);

/// Min-fill elimination order over the non-target, non-evidence variables.
std::vector<int> min_fill_order(const IndexedNetwork& ix, const Evidence& evidence,
                                const std::vector<int>& targets);

} // namespace bnforge
