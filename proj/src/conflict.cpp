#include "bnforge/conflict.hpp"

#include <cmath>
#include <limits>

#include "bnforge/errors.hpp"
#include "bnforge/inference.hpp"

namespace bnforge {

ConflictScore conflict(const CompiledNetwork& net, const Evidence& evidence, double threshold_bits) {
    ConflictScore score;
    score.threshold_bits = threshold_bits;
    if (evidence.empty()) return score;

    double joint = evidence_probability(net, evidence);
    if (!(joint > 0.0)) {
        score.impossible = true;
        score.flagged = true;
        score.value_bits = std::numeric_limits<double>::infinity();
        return score;
    }
    double log_product = 0.0;
    for (const auto& [var, state] : evidence) {
        double p = evidence_probability(net, {{var, state}});
        if (!(p > 0.0))
            throw ZeroProbabilityEvidence("finding " + var + "=" + state + " has probability zero");
        log_product += std::log2(p);
    }
    score.value_bits = log_product - std::log2(joint);
    score.flagged = score.value_bits > threshold_bits;
    return score;
}

} // namespace bnforge
