// bnforge — belief-network engineering workbench.
//
// Batch front end: validate/compile knowledge bases, run exact inference,
// importance and conflict analysis, review lints, case-based regression
// testing, and content-addressed versioning.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bnforge/compose.hpp"
#include "bnforge/conflict.hpp"
#include "bnforge/errors.hpp"
#include "bnforge/golden.hpp"
#include "bnforge/importance.hpp"
#include "bnforge/inference.hpp"
#include "bnforge/json_out.hpp"
#include "bnforge/review.hpp"
#include "bnforge/scenario.hpp"
#include "bnforge/sha256.hpp"
#include "bnforge/version_store.hpp"

namespace {

using namespace bnforge;

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KnowledgeBase load_kb(const std::string& path) {
    ParseResult result = parse_kb(read_file(path), path);
    for (const auto& d : result.diagnostics)
        std::cerr << d.span.file << ":" << d.span.line << ":" << d.span.column << ": "
                  << to_string(d.severity) << ": " << d.message << "\n";
    if (!result.ok()) throw UsageError("'" + path + "' did not parse");
    return std::move(*result.kb);
}

Evidence parse_evidence(const std::vector<std::string>& pairs) {
    Evidence e;
    for (const auto& p : pairs) {
        auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("evidence must be VARIABLE=state, got '" + p + "'");
        std::string var = p.substr(0, eq);
        std::string state = p.substr(eq + 1);
        if (e.count(var)) throw UsageError("variable '" + var + "' assigned twice");
        e[var] = state;
    }
    return e;
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::size_t start = 0;
        while (start <= item.size()) {
            auto comma = item.find(',', start);
            std::string piece = item.substr(start, comma == std::string::npos ? comma : comma - start);
            if (!piece.empty()) out.push_back(piece);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

std::filesystem::path store_dir() {
    if (const char* env = std::getenv("BNFORGE_STORE")) return env;
    return ".bnforge";
}

std::string kb_version_id(const KnowledgeBase& kb) { return sha256_hex(serialize_kb(kb)); }

const ScenarioDecl& find_scenario(const KnowledgeBase& kb, const std::string& name) {
    const ScenarioDecl* s = kb.find_scenario(name);
    if (!s) throw UsageError("no scenario named '" + name + "'");
    return *s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

// --- command bodies ---------------------------------------------------------

int cmd_validate(const std::string& kb_path, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledBundle bundle;
    try {
        bundle = compile_kb(kb);
    } catch (const ComposeError& e) {
        std::cout << "composition failed [" << to_string(e.kind) << "]: " << e.what() << "\n";
        return kExitFindings;
    } catch (const ExpandError& e) {
        std::cout << "CPT expansion failed: " << e.what() << "\n";
        return kExitFindings;
    }
    ValidationReport report = validate_network(bundle.net);
    std::vector<Constraint> cs;
    for (const auto& [c, span] : bundle.constraints) cs.push_back(c);
    ConstraintReport creport = check_constraints(bundle.net, cs);

    if (json) {
        std::cout << validation_to_json(report, &creport);
    } else {
        for (const auto& f : report.findings)
            std::cout << to_string(f.severity) << ": " << f.message << "\n";
        for (const auto& v : creport.violations) std::cout << "constraint: " << v.message << "\n";
        if (report.ok() && creport.ok())
            std::cout << "ok: " << bundle.net.variables.size() << " variables, network is consistent\n";
    }
    return (report.ok() && creport.ok()) ? kExitClean : kExitFindings;
}

int cmd_compile(const std::string& kb_path, const std::string& out_path) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledBundle bundle = compile_kb(kb);
    ValidationReport report = validate_network(bundle.net);
    if (!report.ok()) {
        for (const auto& f : report.findings) std::cerr << "error: " << f.message << "\n";
        return kExitFindings;
    }
    write_file(out_path, network_to_json(bundle.net));
    std::cout << "compiled " << bundle.net.variables.size() << " variables -> " << out_path << "\n";
    return kExitClean;
}

int cmd_infer(const std::string& kb_path, const std::vector<std::string>& targets_raw,
              const std::vector<std::string>& evidence_raw, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledNetwork net = compile_kb(kb).net;
    Evidence evidence = parse_evidence(evidence_raw);
    std::vector<std::string> targets = split_list(targets_raw);
    if (targets.empty()) throw UsageError("at least one --target is required");
    try {
        auto marginals = posterior(net, evidence, targets);
        double p = evidence_probability(net, evidence);
        if (json) {
            std::cout << marginals_to_json(marginals, evidence, p);
        } else {
            if (!evidence.empty()) std::cout << "P(evidence) = " << p << "\n";
            for (const auto& [name, m] : marginals) {
                std::cout << name << ":";
                for (std::size_t s = 0; s < m.probabilities.size(); ++s)
                    std::cout << " P(" << m.state_labels[s] << ")=" << m.probabilities[s];
                std::cout << "\n";
            }
        }
        return kExitClean;
    } catch (const ZeroProbabilityEvidence&) {
        std::cout << "impossible: the evidence has probability zero\n";
        return kExitFindings;
    }
}

int cmd_importance(const std::string& kb_path, const std::string& focus,
                   const std::vector<std::string>& evidence_raw,
                   const std::vector<std::string>& base_raw, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledNetwork net = compile_kb(kb).net;
    auto result = importance(net, focus, split_list(evidence_raw), parse_evidence(base_raw));
    std::cout << (json ? importance_to_json(result) : render_importance_report(result));
    return kExitClean;
}

int cmd_synergy(const std::string& kb_path, const std::string& focus,
                const std::vector<std::string>& evidence_raw, std::size_t k, std::size_t n,
                std::uint64_t seed, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledNetwork net = compile_kb(kb).net;
    auto entries = synergy_sample(net, focus, split_list(evidence_raw), k, n, seed);
    if (json) {
        std::cout << synergy_to_json(entries, focus);
    } else {
        std::cout << "Synergy sample for \"" << focus << "\" (k=" << k << ")\n";
        for (const auto& e : entries) {
            std::cout << "joint I = " << e.joint_importance << "  synergy = " << e.synergy << "  {";
            for (std::size_t i = 0; i < e.combination.size(); ++i)
                std::cout << (i ? ", " : "") << e.combination[i];
            std::cout << "}\n";
        }
    }
    return kExitClean;
}

int cmd_conflict(const std::string& kb_path, const std::vector<std::string>& evidence_raw,
                 double threshold, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledNetwork net = compile_kb(kb).net;
    Evidence evidence = parse_evidence(evidence_raw);
    ConflictScore score = conflict(net, evidence, threshold);
    if (json) {
        std::cout << conflict_to_json(score, evidence);
    } else if (score.impossible) {
        std::cout << "conflict: impossible (joint evidence probability is zero), flagged\n";
    } else {
        std::cout << "conflict = " << score.value_bits << " bits (threshold " << score.threshold_bits
                  << "), " << (score.flagged ? "flagged" : "not flagged") << "\n";
    }
    return score.flagged ? kExitFindings : kExitClean;
}

int cmd_review(const std::string& kb_path, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledBundle bundle;
    const CompiledNetwork* net = nullptr;
    const std::vector<std::pair<Constraint, SourceSpan>>* constraints = nullptr;
    try {
        bundle = compile_kb(kb);
        net = &bundle.net;
        constraints = &bundle.constraints;
    } catch (const Error& e) {
        std::cerr << "note: KB does not compile (" << e.what() << "); R4 skipped\n";
    }
    auto findings = elicitation_review(kb, net, constraints);
    if (json) {
        std::cout << review_to_json(findings);
    } else {
        for (const auto& f : findings)
            std::cout << f.rule << " " << to_string(f.severity) << " " << f.location.file << ":"
                      << f.location.line << ": " << f.message << "\n";
        if (findings.empty()) std::cout << "no findings\n";
    }
    for (const auto& f : findings)
        if (f.severity != Severity::Info) return kExitFindings;
    return kExitClean;
}

int cmd_cases(const std::string& action, const std::string& kb_path, const std::string& scenario_name,
              const std::string& golden_path, double tol, bool json) {
    KnowledgeBase kb = load_kb(kb_path);
    CompiledNetwork net = compile_kb(kb).net;
    const ScenarioDecl& scenario = find_scenario(kb, scenario_name);
    auto cases = generate_cases(scenario, net);

    if (action == "gen") {
        double cov = coverage(scenario, net, cases);
        if (json) {
            std::cout << cases_to_json(cases, scenario.name, cov);
        } else {
            for (std::size_t i = 0; i < cases.size(); ++i) {
                std::cout << i << ":";
                for (const auto& [var, state] : cases[i].assignments)
                    std::cout << " " << var << "=" << state;
                std::cout << "\n";
            }
            std::cout << "coverage " << cov << " (" << cases.size() << " cases)\n";
        }
        return kExitClean;
    }

    RunResults results = run_cases(net, scenario, cases);
    if (action == "run") {
        if (json) {
            std::cout << run_results_to_json(results);
        } else {
            for (std::size_t i = 0; i < results.cases.size(); ++i) {
                const auto& c = results.cases[i];
                std::cout << "case " << i << ":";
                for (const auto& [var, state] : c.assignments) std::cout << " " << var << "=" << state;
                if (c.impossible) {
                    std::cout << " -> impossible\n";
                    continue;
                }
                std::cout << " | P(e)=" << c.evidence_probability << " conflict=" << c.conflict_bits
                          << "\n";
                for (const auto& [fname, m] : c.focus) {
                    std::cout << "  " << fname << ":";
                    for (std::size_t s = 0; s < m.probabilities.size(); ++s)
                        std::cout << " P(" << m.state_labels[s] << ")=" << m.probabilities[s];
                    std::cout << "\n";
                }
            }
        }
        return kExitClean;
    }

    if (action == "record") {
        if (golden_path.empty()) throw UsageError("cases record requires --golden FILE");
        GoldenRecord golden = record_golden(results, kb_version_id(kb));
        write_file(golden_path, golden_to_json(golden));
        std::cout << "recorded " << results.cases.size() << " cases -> " << golden_path << "\n";
        return kExitClean;
    }

    if (action == "compare") {
        if (golden_path.empty()) throw UsageError("cases compare requires --golden FILE");
        GoldenRecord golden = golden_from_json(read_file(golden_path));
        RegressionReport report = compare_golden(results, golden, tol);
        if (json) {
            std::cout << regression_to_json(report, tol);
        } else if (report.case_set_mismatch) {
            std::cout << "case-set mismatch: " << report.mismatch_detail << "\n";
        } else {
            for (const auto& d : report.drifts)
                std::cout << "regression: case " << d.case_index << " " << d.focus << "=" << d.state
                          << " got " << d.got << " want " << d.want << "\n";
            for (const auto& s : report.status_changes)
                std::cout << "regression: case " << s.case_index << " impossibility changed ("
                          << (s.was_impossible ? "impossible" : "possible") << " -> "
                          << (s.now_impossible ? "impossible" : "possible") << ")\n";
            if (report.pass()) std::cout << "pass: no regressions at tol " << tol << "\n";
        }
        return report.pass() ? kExitClean : kExitFindings;
    }
    throw UsageError("unknown cases action '" + action + "'");
}

int cmd_snapshot(const std::string& kb_path, const std::string& message,
                 const std::string& rationale) {
    KnowledgeBase kb = load_kb(kb_path);
    VersionStore store(store_dir());
    KbVersion v = store.snapshot(kb, message, rationale, store.head());
    std::cout << v.id << "\n";
    return kExitClean;
}

int cmd_diff(const std::string& v1, const std::string& v2, bool json) {
    VersionStore store(store_dir());
    if (!store.has(v1)) throw UsageError("unknown version id '" + v1 + "'");
    if (!store.has(v2)) throw UsageError("unknown version id '" + v2 + "'");
    KbDiff diff = store.diff(v1, v2);
    if (json) {
        std::cout << diff_to_json(diff);
    } else if (diff.empty()) {
        std::cout << "no differences\n";
    } else {
        for (const auto& e : diff.entries) std::cout << e.op << " " << e.kind << " " << e.path << "\n";
    }
    return kExitClean;
}

int cmd_log(bool json) {
    VersionStore store(store_dir());
    auto entries = store.log();
    if (json) {
        std::cout << log_to_json(entries);
    } else {
        for (const auto& v : entries) {
            std::cout << v.id << " " << v.timestamp;
            if (!v.parent.empty()) std::cout << " parent " << v.parent.substr(0, 12);
            std::cout << "\n  " << v.message << "\n";
            if (!v.rationale.empty()) std::cout << "  rationale: " << v.rationale << "\n";
        }
    }
    return kExitClean;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bnforge: belief-network engineering workbench"};
    app.require_subcommand(1);

    std::string kb_path, out_path, focus, scenario_name, golden_path, message, rationale;
    std::string version_a, version_b, cases_action;
    std::vector<std::string> targets, evidence, base;
    double threshold = kDefaultConflictThresholdBits;
    double tol = kDefaultGoldenTolerance;
    std::size_t k = 2, samples = 10;
    std::uint64_t seed = 0;
    bool json = false;

    auto* validate = app.add_subcommand("validate", "parse, compile and validate a KB");
    validate->add_option("kb", kb_path)->required();
    validate->add_flag("--json", json);

    auto* compile_cmd = app.add_subcommand("compile", "compile a KB to a flat network file");
    compile_cmd->add_option("kb", kb_path)->required();
    compile_cmd->add_option("--out", out_path)->required();

    auto* infer = app.add_subcommand("infer", "exact posterior marginals");
    infer->add_option("kb", kb_path)->required();
    infer->add_option("--target", targets)->required();
    infer->add_option("--evidence", evidence);
    infer->add_flag("--json", json);

    auto* imp = app.add_subcommand("importance", "rank evidence variables by impact on a focus");
    imp->add_option("kb", kb_path)->required();
    imp->add_option("--focus", focus)->required();
    imp->add_option("--evidence", evidence)->required();
    imp->add_option("--base", base);
    imp->add_flag("--json", json);

    auto* syn = app.add_subcommand("synergy", "sample evidence-variable combinations");
    syn->add_option("kb", kb_path)->required();
    syn->add_option("--focus", focus)->required();
    syn->add_option("--evidence", evidence)->required();
    syn->add_option("--k", k);
    syn->add_option("--samples", samples);
    syn->add_option("--seed", seed);
    syn->add_flag("--json", json);

    auto* conf = app.add_subcommand("conflict", "data-conflict score for an evidence set");
    conf->add_option("kb", kb_path)->required();
    conf->add_option("--evidence", evidence)->required();
    conf->add_option("--threshold", threshold);
    conf->add_flag("--json", json);

    auto* review = app.add_subcommand("review", "elicitation-review lints R1-R7");
    review->add_option("kb", kb_path)->required();
    review->add_flag("--json", json);

    auto* cases = app.add_subcommand("cases", "scenario case generation / run / record / compare");
    cases->add_option("action", cases_action)->required()->check(CLI::IsMember({"gen", "run", "record", "compare"}));
    cases->add_option("kb", kb_path)->required();
    cases->add_option("--scenario", scenario_name)->required();
    cases->add_option("--golden", golden_path);
    cases->add_option("--tol", tol);
    cases->add_flag("--json", json);

    auto* snap = app.add_subcommand("snapshot", "content-addressed snapshot of a KB");
    snap->add_option("kb", kb_path)->required();
    snap->add_option("-m,--message", message)->required();
    snap->add_option("-r,--rationale", rationale)->required();

    auto* diff = app.add_subcommand("diff", "structural diff between two versions");
    diff->add_option("v1", version_a)->required();
    diff->add_option("v2", version_b)->required();
    diff->add_flag("--json", json);

    auto* log_cmd = app.add_subcommand("log", "version history");
    log_cmd->add_flag("--json", json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(kb_path, json);
        if (compile_cmd->parsed()) return cmd_compile(kb_path, out_path);
        if (infer->parsed()) return cmd_infer(kb_path, targets, evidence, json);
        if (imp->parsed()) return cmd_importance(kb_path, focus, evidence, base, json);
        if (syn->parsed()) return cmd_synergy(kb_path, focus, evidence, k, samples, seed, json);
        if (conf->parsed()) return cmd_conflict(kb_path, evidence, threshold, json);
        if (review->parsed()) return cmd_review(kb_path, json);
        if (cases->parsed()) return cmd_cases(cases_action, kb_path, scenario_name, golden_path, tol, json);
        if (snap->parsed()) return cmd_snapshot(kb_path, message, rationale);
        if (diff->parsed()) return cmd_diff(version_a, version_b, json);
        if (log_cmd->parsed()) return cmd_log(json);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RefError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ComposeError& e) {
        std::cerr << "error [" << to_string(e.kind) << "]: " << e.what() << "\n";
        return kExitFindings;
    } catch (const ZeroProbabilityEvidence& e) {
        std::cout << "impossible: " << e.what() << "\n";
        return kExitFindings;
    } catch (const ExpandError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFindings;
    } catch (const StoreError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
