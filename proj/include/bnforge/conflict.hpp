#pragma once

#include "bnforge/network.hpp"
#include "bnforge/types.hpp"

namespace bnforge {

/// Data-conflict measure in bits:
///   value = log2( prod_i P(e_i) / P(e) )
/// Large positive values mean the findings are individually plausible but
/// jointly incoherent — a cue that the scenario is out of the model's scope.
struct ConflictScore {
    double value_bits = 0.0;
    double threshold_bits = 2.0;
    bool flagged = false;
    bool impossible = false; // joint evidence has probability zero
};

constexpr double kDefaultConflictThresholdBits = 2.0;

ConflictScore conflict(const CompiledNetwork& net, const Evidence& evidence,
                       double threshold_bits = kDefaultConflictThresholdBits);

} // namespace bnforge
