#include "bnforge/json_out.hpp"

#include <cmath>

#include <json.hpp>

#include "case_json.hpp"
#include "render.hpp"

namespace bnforge {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json evidence_json(const Evidence& e) {
    ordered_json j = ordered_json::object();
    for (const auto& [var, state] : e) j[var] = state;
    return j;
}

ordered_json span_json(const SourceSpan& s) {
    ordered_json j;
    j["file"] = s.file;
    j["line"] = s.line;
    j["column"] = s.column;
    j["length"] = s.length;
    return j;
}

ordered_json marginal_json(const Marginal& m) {
    ordered_json j;
    j["states"] = m.state_labels;
    ordered_json probs = ordered_json::array();
    for (double p : m.probabilities) probs.push_back(p);
    j["probabilities"] = probs;
    return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

} // namespace

std::string network_to_json(const CompiledNetwork& net) {
    ordered_json j;
    j["schema"] = "bnforge.net/1";
    ordered_json vars = ordered_json::array();
    for (const auto& v : net.variables) {
        ordered_json vj;
        vj["name"] = v.name;
        vj["states"] = v.space.states;
        vj["ordered"] = v.space.ordered;
        if (!v.class_ref.empty()) vj["class"] = v.class_ref;
        if (!v.description.empty()) vj["description"] = v.description;
        vj["parents"] = net.parents.at(v.name);
        ordered_json rows = ordered_json::array();
        for (const auto& row : net.cpts.at(v.name)) {
            ordered_json r = ordered_json::array();
            for (double p : row) r.push_back(p);
            rows.push_back(r);
        }
        vj["cpt"] = rows;
        const auto& prov = net.provenance.at(v.name);
        vj["provenance"] = {{"fragment", prov.fragment}, {"form", to_string(prov.form)}};
        vars.push_back(vj);
    }
    j["variables"] = vars;
    return dump(j);
}

std::string validation_to_json(const ValidationReport& report, const ConstraintReport* constraints) {
    ordered_json j;
    j["schema"] = "bnforge.validation/1";
    ordered_json findings = ordered_json::array();
    for (const auto& f : report.findings) {
        ordered_json fj;
        fj["severity"] = to_string(f.severity);
        fj["subject"] = f.subject;
        fj["message"] = f.message;
        findings.push_back(fj);
    }
    j["findings"] = findings;
    if (constraints) {
        ordered_json vs = ordered_json::array();
        for (const auto& v : constraints->violations) {
            ordered_json vj;
            vj["constraint"] = v.constraint_index;
            vj["child"] = v.child;
            vj["message"] = v.message;
            vj["value_a"] = v.value_a;
            vj["value_b"] = v.value_b;
            vs.push_back(vj);
        }
        j["constraint_violations"] = vs;
    }
    return dump(j);
}

std::string review_to_json(const std::vector<ReviewFinding>& findings) {
    ordered_json j;
    j["schema"] = "bnforge.review/1";
    ordered_json fs = ordered_json::array();
    for (const auto& f : findings) {
        ordered_json fj;
        fj["rule"] = f.rule;
        fj["severity"] = to_string(f.severity);
        fj["location"] = span_json(f.location);
        fj["message"] = f.message;
        fs.push_back(fj);
    }
    j["findings"] = fs;
    return dump(j);
}

std::string marginals_to_json(const std::map<std::string, Marginal>& marginals,
                              const Evidence& evidence, double evidence_prob) {
    ordered_json j;
    j["schema"] = "bnforge.posterior/1";
    j["evidence"] = evidence_json(evidence);
    j["evidence_probability"] = evidence_prob;
    ordered_json targets = ordered_json::object();
    for (const auto& [name, m] : marginals) targets[name] = marginal_json(m);
    j["targets"] = targets;
    return dump(j);
}

std::string importance_to_json(const ImportanceResult& result) {
    ordered_json j;
    j["schema"] = "bnforge.importance/1";
    j["focus"] = result.focus;
    j["base"] = evidence_json(result.base);
    ordered_json entries = ordered_json::array();
    for (const auto& e : result.entries) {
        ordered_json ej;
        ej["name"] = e.variable;
        ej["importance"] = e.importance;
        ej["score"] = e.score;
        ej["stars"] = e.score == 0.0 ? 0 : static_cast<int>(std::ceil(5.0 * e.score / 100.0));
        ej["rank"] = e.rank;
        entries.push_back(ej);
    }
    j["entries"] = entries;
    return dump(j);
}

std::string synergy_to_json(const std::vector<SynergyEntry>& entries, const std::string& focus) {
    ordered_json j;
    j["schema"] = "bnforge.synergy/1";
    j["focus"] = focus;
    ordered_json es = ordered_json::array();
    for (const auto& e : entries) {
        ordered_json ej;
        ej["combination"] = e.combination;
        ej["joint_importance"] = e.joint_importance;
        ej["synergy"] = e.synergy;
        es.push_back(ej);
    }
    j["entries"] = es;
    return dump(j);
}

std::string conflict_to_json(const ConflictScore& score, const Evidence& evidence) {
    ordered_json j;
    j["schema"] = "bnforge.conflict/1";
    j["evidence"] = evidence_json(evidence);
    j["impossible"] = score.impossible;
    if (score.impossible)
        j["value_bits"] = nullptr;
    else
        j["value_bits"] = score.value_bits;
    j["threshold_bits"] = score.threshold_bits;
    j["flagged"] = score.flagged;
    return dump(j);
}

std::string cases_to_json(const std::vector<TestCase>& cases, const std::string& scenario,
                          double coverage_value) {
    ordered_json j;
    j["schema"] = "bnforge.cases/1";
    j["scenario"] = scenario;
    j["coverage"] = coverage_value;
    ordered_json cs = ordered_json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        ordered_json cj;
        cj["index"] = i;
        cj["assignments"] = evidence_json(cases[i].assignments);
        cs.push_back(cj);
    }
    j["cases"] = cs;
    return dump(j);
}

std::string run_results_to_json(const RunResults& results) {
    ordered_json j;
    j["schema"] = "bnforge.run/1";
    j["scenario"] = results.scenario;
    ordered_json cs = ordered_json::array();
    for (std::size_t i = 0; i < results.cases.size(); ++i)
        cs.push_back(detail::case_to_json(results.cases[i], i));
    j["cases"] = cs;
    return dump(j);
}

std::string regression_to_json(const RegressionReport& report, double tol) {
    ordered_json j;
    j["schema"] = "bnforge.regression/1";
    j["tolerance"] = tol;
    j["pass"] = report.pass();
    j["case_set_mismatch"] = report.case_set_mismatch;
    if (report.case_set_mismatch) j["mismatch_detail"] = report.mismatch_detail;
    ordered_json drifts = ordered_json::array();
    for (const auto& d : report.drifts) {
        ordered_json dj;
        dj["case"] = d.case_index;
        dj["focus"] = d.focus;
        dj["state"] = d.state;
        dj["got"] = d.got;
        dj["want"] = d.want;
        drifts.push_back(dj);
    }
    j["value_drift"] = drifts;
    ordered_json status = ordered_json::array();
    for (const auto& s : report.status_changes) {
        ordered_json sj;
        sj["case"] = s.case_index;
        sj["was_impossible"] = s.was_impossible;
        sj["now_impossible"] = s.now_impossible;
        status.push_back(sj);
    }
    j["impossibility_changes"] = status;
    return dump(j);
}

namespace {

std::string payload_text(const DiffEntry::Payload& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, DefineDecl>) return render::define_decl(v);
            else if constexpr (std::is_same_v<T, ClassDecl>) return render::class_decl(v);
            else if constexpr (std::is_same_v<T, TemplateDecl>) return render::template_decl(v);
            else if constexpr (std::is_same_v<T, FragmentDecl>) return render::fragment_decl(v);
            else if constexpr (std::is_same_v<T, InputDecl>) return render::input_decl(v);
            else if constexpr (std::is_same_v<T, VarDecl>) return render::var_decl(v, "");
            else if constexpr (std::is_same_v<T, DiffEntry::ArcChange>) {
                std::string s = "(";
                for (std::size_t i = 0; i < v.parents.size(); ++i) {
                    if (i) s += ", ";
                    s += v.parents[i];
                }
                return s + ")";
            } else if constexpr (std::is_same_v<T, DiffEntry::RowChange>) {
                return render::prob_vector(v.probs);
            } else if constexpr (std::is_same_v<T, DiffEntry::CptChange>) {
                return v.cpt ? render::cpt_clause(v.parents, *v.cpt, "") : "(none)";
            } else if constexpr (std::is_same_v<T, DiffEntry::FragmentMeta>) {
                return std::string(v.is_stub ? "stub" : "fragment") +
                       (v.description.empty() ? "" : " description \"" + v.description + "\"");
            } else if constexpr (std::is_same_v<T, TopConstraint>) {
                return render::constraint_decl(v.constraint);
            } else if constexpr (std::is_same_v<T, ScenarioDecl>) {
                return render::scenario_decl(v);
            } else if constexpr (std::is_same_v<T, CompositionSpec>) {
                return v.present ? render::composition_block(v) : "(absent)";
            } else {
                return "";
            }
        },
        p);
}

} // namespace

std::string diff_to_json(const KbDiff& diff) {
    ordered_json j;
    j["schema"] = "bnforge.diff/1";
    j["from"] = diff.from_id;
    j["to"] = diff.to_id;
    ordered_json entries = ordered_json::array();
    for (const auto& e : diff.entries) {
        ordered_json ej;
        ej["kind"] = e.kind;
        ej["op"] = e.op;
        ej["path"] = e.path;
        std::string old_text = payload_text(e.old_value);
        std::string new_text = payload_text(e.new_value);
        ej["old"] = old_text.empty() ? ordered_json(nullptr) : ordered_json(old_text);
        ej["new"] = new_text.empty() ? ordered_json(nullptr) : ordered_json(new_text);
        entries.push_back(ej);
    }
    j["entries"] = entries;
    return dump(j);
}

std::string log_to_json(const std::vector<KbVersion>& entries) {
    ordered_json j;
    j["schema"] = "bnforge.log/1";
    ordered_json es = ordered_json::array();
    for (const auto& v : entries) {
        ordered_json vj;
        vj["id"] = v.id;
        vj["parent"] = v.parent;
        vj["message"] = v.message;
        vj["rationale"] = v.rationale;
        vj["timestamp"] = v.timestamp;
        es.push_back(vj);
    }
    j["entries"] = es;
    return dump(j);
}

} // namespace bnforge
