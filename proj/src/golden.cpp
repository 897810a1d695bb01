#include "bnforge/golden.hpp"

#include <cmath>

#include <json.hpp>

#include "bnforge/errors.hpp"
#include "case_json.hpp"

namespace bnforge {

using ordered_json = nlohmann::ordered_json;

namespace detail {

ordered_json case_to_json(const CaseResult& c, std::size_t index) {
    ordered_json j;
    j["index"] = index;
    ordered_json assignments = ordered_json::object();
    for (const auto& [var, state] : c.assignments) assignments[var] = state;
    j["assignments"] = assignments;
    j["impossible"] = c.impossible;
    if (!c.impossible) {
        j["evidence_probability"] = c.evidence_probability;
        j["conflict_bits"] = c.conflict_bits;
        ordered_json focus = ordered_json::object();
        for (const auto& [fname, marg] : c.focus) {
            ordered_json probs = ordered_json::array();
            for (double p : marg.probabilities) probs.push_back(p);
            ordered_json m;
            m["states"] = marg.state_labels;
            m["probabilities"] = probs;
            focus[fname] = m;
        }
        j["focus"] = focus;
    }
    j["verdict"] = nullptr;
    return j;
}

} // namespace detail

GoldenRecord record_golden(const RunResults& results, const std::string& kb_version) {
    return GoldenRecord{kb_version, results.scenario, results.cases};
}

RegressionReport compare_golden(const RunResults& results, const GoldenRecord& golden, double tol) {
    RegressionReport report;
    if (results.scenario != golden.scenario) {
        report.case_set_mismatch = true;
        report.mismatch_detail = "scenario '" + results.scenario + "' vs golden scenario '" +
                                 golden.scenario + "'";
        return report;
    }
    if (results.cases.size() != golden.cases.size()) {
        report.case_set_mismatch = true;
        report.mismatch_detail = "case count " + std::to_string(results.cases.size()) +
                                 " vs golden " + std::to_string(golden.cases.size());
        return report;
    }
    for (std::size_t i = 0; i < results.cases.size(); ++i) {
        if (results.cases[i].assignments != golden.cases[i].assignments) {
            report.case_set_mismatch = true;
            report.mismatch_detail = "case " + std::to_string(i) + " has different assignments";
            return report;
        }
    }

    for (std::size_t i = 0; i < results.cases.size(); ++i) {
        const CaseResult& got = results.cases[i];
        const CaseResult& want = golden.cases[i];
        if (got.impossible != want.impossible) {
            report.status_changes.push_back({i, want.impossible, got.impossible});
            continue;
        }
        if (got.impossible) continue;
        for (const auto& [fname, wmarg] : want.focus) {
            auto git = got.focus.find(fname);
            if (git == got.focus.end()) {
                report.case_set_mismatch = true;
                report.mismatch_detail = "case " + std::to_string(i) + " lacks focus '" + fname + "'";
                return report;
            }
            const auto& gp = git->second.probabilities;
            const auto& wp = wmarg.probabilities;
            if (gp.size() != wp.size()) {
                report.case_set_mismatch = true;
                report.mismatch_detail =
                    "case " + std::to_string(i) + " focus '" + fname + "' has a different state count";
                return report;
            }
            for (std::size_t s = 0; s < wp.size(); ++s)
                if (std::fabs(gp[s] - wp[s]) > tol) {
                    std::string label = s < wmarg.state_labels.size() ? wmarg.state_labels[s]
                                                                      : std::to_string(s);
                    report.drifts.push_back({i, fname, label, gp[s], wp[s]});
                }
        }
    }
    return report;
}

std::string golden_to_json(const GoldenRecord& golden) {
    ordered_json j;
    j["schema"] = "bnforge.golden/1";
    j["kb_version"] = golden.kb_version;
    j["scenario"] = golden.scenario;
    ordered_json cases = ordered_json::array();
    for (std::size_t i = 0; i < golden.cases.size(); ++i)
        cases.push_back(detail::case_to_json(golden.cases[i], i));
    j["cases"] = cases;
    return j.dump(2) + "\n";
}

GoldenRecord golden_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("golden file is not valid JSON");
    if (!j.contains("schema") || j["schema"] != "bnforge.golden/1")
        throw Error("golden file has an unexpected schema tag");
    GoldenRecord out;
    out.kb_version = j.value("kb_version", "");
    out.scenario = j.value("scenario", "");
    for (const auto& cj : j["cases"]) {
        CaseResult c;
        for (auto it = cj["assignments"].begin(); it != cj["assignments"].end(); ++it)
            c.assignments[it.key()] = it.value().get<std::string>();
        c.impossible = cj.value("impossible", false);
        if (!c.impossible) {
            c.evidence_probability = cj.value("evidence_probability", 0.0);
            c.conflict_bits = cj.value("conflict_bits", 0.0);
            if (cj.contains("focus"))
                for (auto it = cj["focus"].begin(); it != cj["focus"].end(); ++it) {
                    Marginal m;
                    m.variable = it.key();
                    for (const auto& label : it.value()["states"])
                        m.state_labels.push_back(label.get<std::string>());
                    for (const auto& p : it.value()["probabilities"])
                        m.probabilities.push_back(p.get<double>());
                    c.focus[it.key()] = std::move(m);
                }
        }
        out.cases.push_back(std::move(c));
    }
    return out;
}

} // namespace bnforge
