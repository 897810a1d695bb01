#pragma once

#include <string>
#include <vector>

#include "bnforge/scenario.hpp"

namespace bnforge {

/// Stored regression baseline: run results plus the KB version they were
/// recorded against. `verdict` fields in the file schema are free-text
/// expert annotations; they carry no comparison semantics.
struct GoldenRecord {
    std::string kb_version;
    std::string scenario;
    std::vector<CaseResult> cases;
};

GoldenRecord record_golden(const RunResults& results, const std::string& kb_version);

constexpr double kDefaultGoldenTolerance = 1e-6;

struct RegressionReport {
    bool case_set_mismatch = false;
    std::string mismatch_detail;

    struct ValueDrift {
        std::size_t case_index = 0;
        std::string focus;
        std::string state;
        double got = 0.0;
        double want = 0.0;
    };
    std::vector<ValueDrift> drifts;

    struct StatusChange {
        std::size_t case_index = 0;
        bool was_impossible = false;
        bool now_impossible = false;
    };
    std::vector<StatusChange> status_changes;

    bool pass() const { return !case_set_mismatch && drifts.empty() && status_changes.empty(); }
};

/// Flags every (case, focus, state) whose focus probability moved by more
/// than tol, plus impossibility-status changes. A differing case set is
/// scenario drift and reported separately from value drift.
RegressionReport compare_golden(const RunResults& results, const GoldenRecord& golden,
                                double tol = kDefaultGoldenTolerance);

std::string golden_to_json(const GoldenRecord& golden);
GoldenRecord golden_from_json(const std::string& text); // throws Error on bad input

} // namespace bnforge
