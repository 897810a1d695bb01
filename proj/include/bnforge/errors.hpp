#pragma once

#include <stdexcept>
#include <string>

namespace bnforge {

/// Base class for all bnforge errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A name did not resolve (variable, state, class, fragment, ...).
struct RefError : Error {
    using Error::Error;
};

/// CPT expansion failed (non-covering/overlapping partition, noisy-OR on
/// non-boolean spaces, malformed explicit table, ...).
struct ExpandError : Error {
    using Error::Error;
};

/// The requested evidence has probability zero. This is a first-class
/// signal, not a crash: the harness records such cases as "impossible".
struct ZeroProbabilityEvidence : Error {
    using Error::Error;
};

/// The joint state space exceeds the brute-force enumeration guard.
struct TooLargeForOracle : Error {
    using Error::Error;
};

/// Fragment composition violated a separability check.
struct ComposeError : Error {
    enum class Kind { HomeConflict, InterfaceMismatch, CrossCycle, UnboundInput };
    Kind kind;
    ComposeError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

inline const char* to_string(ComposeError::Kind k) {
    switch (k) {
        case ComposeError::Kind::HomeConflict: return "HomeConflict";
        case ComposeError::Kind::InterfaceMismatch: return "InterfaceMismatch";
        case ComposeError::Kind::CrossCycle: return "CrossCycle";
        case ComposeError::Kind::UnboundInput: return "UnboundInput";
    }
    return "?";
}

/// Version-store I/O failure.
struct StoreError : Error {
    using Error::Error;
};

} // namespace bnforge
