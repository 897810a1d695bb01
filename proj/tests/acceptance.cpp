// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bnforge/classes.hpp"
#include "bnforge/compose.hpp"
#include "bnforge/conflict.hpp"
#include "bnforge/errors.hpp"
#include "bnforge/importance.hpp"
#include "bnforge/inference.hpp"
#include "bnforge/review.hpp"
#include "bnforge/rng.hpp"
#include "bnforge/scenario.hpp"
#include "bnforge/golden.hpp"
#include "bnforge/sha256.hpp"
#include "bnforge/version_store.hpp"
#include "support/generators.hpp"

using namespace bnforge;
namespace fs = std::filesystem;

namespace {

struct Harness {
    int failures = 0;

    void criterion(int number, const std::string& label, const std::function<void()>& body) {
        std::string detail;
        bool ok = true;
        try {
            body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

KnowledgeBase parse_or_die(const std::string& text) {
    auto result = parse_kb(text, "<acceptance>");
    for (const auto& d : result.diagnostics)
        if (d.severity == Severity::Error) throw Error("fixture did not parse: " + d.message);
    return std::move(*result.kb);
}

double max_abs_delta(const std::map<std::string, Marginal>& a,
                     const std::map<std::string, Marginal>& b) {
    double worst = 0.0;
    for (const auto& [name, ma] : a) {
        const auto& mb = b.at(name);
        for (std::size_t s = 0; s < ma.probabilities.size(); ++s)
            worst = std::max(worst, std::fabs(ma.probabilities[s] - mb.probabilities[s]));
    }
    return worst;
}

// criterion 2c route: I = E_e ||p_e||^2 - ||p||^2
double identity_route(const CompiledNetwork& net, const std::string& focus,
                      const std::string& evar) {
    auto pf = posterior(net, {}, {focus}).at(focus).probabilities;
    auto pe = posterior(net, {}, {evar}).at(evar).probabilities;
    const Variable* ev = net.find(evar);
    double expected_sq = 0.0;
    for (std::size_t s = 0; s < pe.size(); ++s) {
        if (!(pe[s] > 0.0)) continue;
        auto cond = posterior(net, {{evar, ev->space.states[s]}}, {focus}).at(focus).probabilities;
        double sq = 0.0;
        for (double p : cond) sq += p * p;
        expected_sq += pe[s] * sq;
    }
    double base_sq = 0.0;
    for (double p : pf) base_sq += p * p;
    return expected_sq - base_sq;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("bnforge-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

} // namespace

int main() {
    Harness h;

    std::vector<CompiledNetwork> oracle_nets; // shared by criteria 1 and 2c

    h.criterion(1, "oracle equivalence on 500 random networks within 1e-9, under 2 minutes", [&] {
        auto start = std::chrono::steady_clock::now();
        Rng rng(20250808);
        int zero_agreements = 0;
        for (int trial = 0; trial < 500; ++trial) {
            auto net = testgen::random_network(rng, 3 + rng.below(10)); // <= 12 variables
            oracle_nets.push_back(net);
            std::vector<std::string> targets;
            for (const auto& v : net.variables) targets.push_back(v.name);

            Evidence evidence = testgen::random_evidence(rng, net);
            for (int attempt = 0; attempt < 5; ++attempt) {
                bool ve_zero = false, bf_zero = false;
                std::map<std::string, Marginal> ve, bf;
                try {
                    ve = posterior(net, evidence, targets);
                } catch (const ZeroProbabilityEvidence&) {
                    ve_zero = true;
                }
                try {
                    bf = brute_force_posterior(net, evidence, targets);
                } catch (const ZeroProbabilityEvidence&) {
                    bf_zero = true;
                }
                require(ve_zero == bf_zero, "engines disagree about zero-probability evidence");
                if (!ve_zero) {
                    double delta = max_abs_delta(ve, bf);
                    require(delta <= 1e-9, "max delta " + std::to_string(delta));
                    break;
                }
                ++zero_agreements;
                evidence = testgen::random_evidence(rng, net); // redraw and compare values too
            }
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        require(elapsed < 120, "took " + std::to_string(elapsed) + "s");
        (void)zero_agreements;
    });

    h.criterion(2, "importance: independence, copy=0.5, quadratic identity, chain=0.17866", [&] {
        // (a) independence construction
        auto independent = testgen::make_net({
            {"F", {"t", "f"}, {}, {{0.4, 0.6}}},
            {"E", {"t", "f"}, {}, {{0.3, 0.7}}},
        });
        auto ra = importance(independent, "F", {"E"}, {});
        require(ra.entries[0].importance < 1e-12, "independent importance not < 1e-12");

        // (b) deterministic copy with a uniform binary prior
        auto copy = testgen::make_net({
            {"F", {"t", "f"}, {}, {{0.5, 0.5}}},
            {"E", {"t", "f"}, {"F"}, {{1.0, 0.0}, {0.0, 1.0}}},
        });
        auto rb = importance(copy, "F", {"E"}, {});
        require(std::fabs(rb.entries[0].importance - 0.5) <= 1e-9, "copy importance not 0.5");

        // (c) algebraic identity on the criterion-1 networks
        require(!oracle_nets.empty(), "criterion 1 must run first");
        for (const auto& net : oracle_nets) {
            const std::string focus = net.variables.front().name;
            const std::string evar = net.variables.back().name;
            if (focus == evar) continue;
            double direct = importance(net, focus, {evar}, {}).entries[0].importance;
            double via_identity = identity_route(net, focus, evar);
            require(std::fabs(direct - via_identity) <= 1e-9,
                    "identity mismatch " + std::to_string(std::fabs(direct - via_identity)));
        }

        // (d) chain fixture
        auto rd = importance(testgen::chain_ab(), "A", {"B"}, {});
        require(std::fabs(rd.entries[0].importance - 0.17866) <= 1e-4,
                "chain importance " + std::to_string(rd.entries[0].importance));
    });

    h.criterion(3, "noisy-OR equals the closed form exhaustively up to 10 parents, error 0", [&] {
        Rng rng(3333);
        StateSpace boolean{{"t", "f"}, false};
        for (std::size_t n = 1; n <= 10; ++n) {
            NoisyOrCpt spec;
            for (std::size_t i = 0; i < n; ++i)
                spec.link.push_back(static_cast<double>(rng.below(1001)) / 1000.0);
            spec.leak = static_cast<double>(rng.below(1001)) / 1000.0;
            std::vector<StateSpace> parents(n, boolean);
            auto table = expand_cpt(CptSpec{spec}, boolean, parents);
            require(table.size() == (std::size_t{1} << n), "row count");
            for (std::size_t r = 0; r < table.size(); ++r) {
                auto cfg = decode_config(r, parents);
                double miss = 1.0 - spec.leak;
                for (std::size_t i = 0; i < n; ++i)
                    if (cfg[i] == 0) miss *= 1.0 - spec.link[i];
                require(table[r][0] == 1.0 - miss && table[r][1] == miss,
                        "closed-form mismatch at row " + std::to_string(r));
            }
        }
    });

    h.criterion(4, "separability error classes and compose order-insensitivity (24 permutations)", [&] {
        auto expect_kind = [&](const char* text, ComposeError::Kind kind) {
            auto kb = parse_or_die(text);
            try {
                compile_kb(kb);
                throw Error("composition unexpectedly succeeded");
            } catch (const ComposeError& e) {
                require(e.kind == kind, std::string("wrong error class: got ") + to_string(e.kind));
            }
        };
        expect_kind(R"(
fragment F1 { var A states {t,f} prior (0.3, 0.7) }
fragment F2 { var A states {t,f} prior (0.4, 0.6) }
model { use F1 use F2 })",
                    ComposeError::Kind::HomeConflict);
        expect_kind(R"(
fragment F1 { var A states {t,f} prior (0.3, 0.7) }
fragment F2 {
  input A states {t,f,m}
  var B states {t,f} partition (A) { element (*) rationale "flat" -> (0.5, 0.5) }
}
model { use F1 use F2 bind F2.A -> F1.A })",
                    ComposeError::Kind::InterfaceMismatch);
        expect_kind(R"(
fragment F1 {
  input B states {t,f}
  var A states {t,f} cpt (B) { (t) -> (0.9, 0.1) (f) -> (0.2, 0.8) }
}
fragment F2 {
  input A states {t,f}
  var B states {t,f} cpt (A) { (t) -> (0.9, 0.1) (f) -> (0.2, 0.8) }
}
model { use F1 use F2 bind F1.B -> F2.B bind F2.A -> F1.A })",
                    ComposeError::Kind::CrossCycle);
        expect_kind(R"(
fragment F2 {
  input A states {t,f}
  var B states {t,f} partition (A) { element (*) rationale "flat" -> (0.5, 0.5) }
}
model { use F2 })",
                    ComposeError::Kind::UnboundInput);

        const char* fragments[4] = {
            "fragment W { var Weather states {dry, wet} prior (0.7, 0.3) }",
            R"(fragment G {
  input Weather states {dry, wet}
  var Ground states {firm, soft} cpt (Weather) { (dry) -> (0.9, 0.1) (wet) -> (0.3, 0.7) }
})",
            R"(fragment M {
  input Ground states {firm, soft}
  var Mobility states {high, low} cpt (Ground) { (firm) -> (0.8, 0.2) (soft) -> (0.25, 0.75) }
})",
            R"(fragment S {
  input Mobility states {high, low}
  var Sighting states {yes, no} cpt (Mobility) { (high) -> (0.6, 0.4) (low) -> (0.15, 0.85) }
})",
        };
        const char* model = R"(
model {
  use W use G use M use S
  bind G.Weather -> W.Weather
  bind M.Ground -> G.Ground
  bind S.Mobility -> M.Mobility
})";
        std::array<int, 4> perm{0, 1, 2, 3};
        std::string first_hash;
        int count = 0;
        do {
            std::string text;
            for (int i : perm) text += std::string(fragments[i]) + "\n";
            text += model;
            auto net = compile_kb(parse_or_die(text)).net;
            std::string hash = network_content_hash(net);
            if (first_hash.empty()) first_hash = hash;
            require(hash == first_hash, "permutation changed the compiled network");
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        require(count == 24, "expected 24 permutations");
    });

    h.criterion(5, "stub transparency: oracle-marginal stub matches the full model within 1e-9", [&] {
        auto kb = parse_or_die(R"(
fragment Supplies { var Supply states {good, poor} prior (0.6, 0.4) }
fragment Attrition {
  input Supply states {good, poor}
  var Losses states {light, heavy} cpt (Supply) { (good) -> (0.8, 0.2) (poor) -> (0.35, 0.65) }
  var "Current TELs" states {none, few, many}
      cpt (Losses) { (light) -> (0.05, 0.45, 0.5) (heavy) -> (0.5, 0.4, 0.1) }
}
fragment Sighting {
  input "Current TELs" states {none, few, many}
  var "Report # TELs" states {zero, some, lots}
      cpt ("Current TELs") { (none) -> (0.9, 0.09, 0.01) (few) -> (0.2, 0.7, 0.1) (many) -> (0.05, 0.35, 0.6) }
}
stub fragment AttrStub { var "Current TELs" states {none, few, many} prior (0.3, 0.4, 0.3) }
)");
        auto resolved = [&](const char* name) {
            return resolve_spaces({*kb.find_fragment(name)}, kb.classes, kb.definitions)[0];
        };
        std::vector<BindDirective> full_binds{
            {"Attrition", "Supply", "Supplies", "Supply", {}},
            {"Sighting", "Current TELs", "Attrition", "Current TELs", {}}};
        CompiledNetwork full_net =
            compile(compose({resolved("Supplies"), resolved("Attrition"), resolved("Sighting")},
                            full_binds, {}),
                    kb.classes);

        auto boundary = brute_force_posterior(full_net, {}, {"Current TELs"});
        FragmentDecl stub = resolved("AttrStub");
        for (auto& item : stub.items)
            if (auto* v = std::get_if<VarDecl>(&item)) {
                ExplicitCpt prior;
                prior.rows.push_back({{}, boundary.at("Current TELs").probabilities});
                v->cpt = CptSpec{std::move(prior)};
            }
        std::vector<BindDirective> stub_binds{
            {"Sighting", "Current TELs", "AttrStub", "Current TELs", {}}};
        CompiledNetwork stub_net =
            compile(compose({resolved("Supplies"), stub, resolved("Sighting")}, stub_binds, {}),
                    kb.classes);

        for (const char* state : {"zero", "some", "lots"}) {
            Evidence e{{"Report # TELs", state}};
            double delta = max_abs_delta(posterior(full_net, e, {"Current TELs"}),
                                         posterior(stub_net, e, {"Current TELs"}));
            require(delta <= 1e-9, "posterior delta " + std::to_string(delta));
        }
        double delta = max_abs_delta(posterior(full_net, {}, {"Report # TELs"}),
                                     posterior(stub_net, {}, {"Report # TELs"}));
        require(delta <= 1e-9, "marginal delta " + std::to_string(delta));
    });

    h.criterion(6, "conflict: independent 0 +- 1e-9; contradiction 4.658 +- 1e-3, flagged at 2 bits", [&] {
        auto independent = testgen::make_net({
            {"A", {"t", "f"}, {}, {{0.3, 0.7}}},
            {"B", {"t", "f"}, {}, {{0.8, 0.2}}},
        });
        auto zero = conflict(independent, {{"A", "t"}, {"B", "f"}});
        require(std::fabs(zero.value_bits) <= 1e-9, "independent conflict not 0");
        require(!zero.flagged, "independent conflict flagged");

        auto contradiction = testgen::make_net({
            {"A", {"t", "f"}, {}, {{0.5, 0.5}}},
            {"B1", {"t", "f"}, {"A"}, {{0.99, 0.01}, {0.01, 0.99}}},
            {"B2", {"t", "f"}, {"A"}, {{0.99, 0.01}, {0.01, 0.99}}},
        });
        auto hot = conflict(contradiction, {{"B1", "t"}, {"B2", "f"}});
        require(std::fabs(hot.value_bits - std::log2(0.25 / 0.0099)) <= 1e-9,
                "conflict value mismatch vs closed form");
        require(std::fabs(hot.value_bits - 4.658) <= 1e-3, "conflict not 4.658 +- 1e-3");
        require(hot.flagged && hot.threshold_bits == 2.0, "not flagged at the default threshold");
    });

    h.criterion(7, "regression: self-compare empty, 0.05 perturbation caught, d-separated focus exact", [&] {
        auto net = testgen::make_net({
            {"A", {"t", "f"}, {}, {{0.3, 0.7}}},
            {"B", {"t", "f"}, {"A"}, {{0.9, 0.1}, {0.2, 0.8}}},
            {"C", {"t", "f"}, {}, {{0.45, 0.55}}},
        });
        ScenarioDecl s;
        s.name = "S";
        s.focus = {"A", "C"};
        s.evidence.push_back({"B", {}});
        auto cases = generate_cases(s, net);
        auto results = run_cases(net, s, cases);
        auto golden = record_golden(results, "v1");
        require(compare_golden(results, golden).pass(), "self-comparison not empty");

        auto perturbed = net;
        perturbed.cpts["B"] = {{0.95, 0.05}, {0.2, 0.8}};
        auto drifted = run_cases(perturbed, s, cases);
        auto report = compare_golden(drifted, golden, 1e-6);
        require(!report.pass(), "0.05 perturbation not detected at tol 1e-6");
        for (const auto& d : report.drifts)
            require(d.focus == "A", "d-separated focus C drifted");
        for (std::size_t i = 0; i < results.cases.size(); ++i)
            for (std::size_t st = 0; st < 2; ++st)
                require(results.cases[i].focus.at("C").probabilities[st] ==
                            drifted.cases[i].focus.at("C").probabilities[st],
                        "d-separated focus delta is not exactly zero");
    });

    h.criterion(8, "DSL round-trip identity on 1000 randomized KBs; serializer idempotent", [&] {
        Rng rng(88888);
        for (int i = 0; i < 1000; ++i) {
            KnowledgeBase kb = testgen::random_kb(rng);
            std::string text = serialize_kb(kb);
            auto parsed = parse_kb(text, "<roundtrip>");
            require(parsed.ok(), "canonical form did not reparse");
            require(structurally_equal(*parsed.kb, kb), "round-trip changed the KB");
            require(serialize_kb(*parsed.kb) == text, "serializer not idempotent");
        }
    });

    h.criterion(9, "versioning: content-address idempotence, empty self-diff, replay over 100 edits", [&] {
        TempDir dir;
        VersionStore store(dir.path);
        Rng rng(99999);
        KnowledgeBase kb = testgen::random_kb(rng);
        auto v1 = store.snapshot(kb, "base", "start");
        auto v2 = store.snapshot(kb, "again", "same content");
        require(v1.id == v2.id, "content addressing not idempotent");
        require(store.diff(v1.id, v1.id).empty(), "self-diff not empty");

        for (int seq = 0; seq < 100; ++seq) {
            KnowledgeBase a = testgen::random_kb(rng);
            KnowledgeBase b = a;
            std::size_t edits = 1 + rng.below(4);
            for (std::size_t e = 0; e < edits; ++e) testgen::random_edit(rng, b);
            auto diff = diff_kbs(a, b);
            KnowledgeBase replayed = a;
            apply_diff(replayed, diff);
            require(serialize_kb(replayed) == serialize_kb(b), "replay did not reconstruct v2");
            bool same_id = sha256_hex(serialize_kb(a)) == sha256_hex(serialize_kb(b));
            require(diff.empty() == same_id, "diff emptiness disagrees with id equality");
        }
    });

    h.criterion(10, "review rules R1-R7: positive and negative fixtures, deterministic order", [&] {
        auto has_rule = [](const std::vector<ReviewFinding>& findings, const char* rule) {
            for (const auto& f : findings)
                if (f.rule == rule) return true;
            return false;
        };
        auto review_text = [&](const std::string& text) {
            auto kb = parse_or_die(text);
            return elicitation_review(kb);
        };

        // R1
        require(has_rule(review_text(R"(
fragment F1 { var D states {near, far} prior (0.5, 0.5) }
fragment F2 { input D states {near, mid, far}
  var X states {t,f} partition (D) { element (*) rationale "flat" -> (0.5, 0.5) } })"),
                         "R1"),
                "R1 positive fixture");
        require(!has_rule(review_text(R"(
fragment F1 { var D states {near, far} prior (0.5, 0.5) }
fragment F2 { input D states {near, far}
  var X states {t,f} partition (D) { element (*) rationale "flat" -> (0.5, 0.5) } })"),
                          "R1"),
                "R1 negative fixture");
        // R2
        require(has_rule(review_text("fragment F { var A states {t,f} prior (0.5, 0.6) }"), "R2"),
                "R2 positive fixture");
        require(!has_rule(review_text("fragment F { var A states {t,f} prior (0.5, 0.5) }"), "R2"),
                "R2 negative fixture");
        // R3
        require(has_rule(review_text(R"(
fragment F { var P states {x,y} prior (0.5, 0.5)
  var A states {t,f} cpt (P) { (x) -> (0.25, 0.75) (y) -> (0.25, 0.75) } })"),
                         "R3"),
                "R3 positive fixture");
        require(!has_rule(review_text(R"(
fragment F { var P states {x,y} prior (0.5, 0.5)
  var A states {t,f} partition (P) { element (*) rationale "one regime" -> (0.25, 0.75) } })"),
                          "R3"),
                "R3 negative fixture");
        // R4 (needs the compiled network)
        {
            auto bad = parse_or_die(R"(
fragment F { var D states ordered {near, far} prior (0.5, 0.5)
  var Det states {t,f} cpt (D) { (near) -> (0.4, 0.6) (far) -> (0.9, 0.1) } }
constraint monotone Det = t along D nonincreasing
model { use F })");
            auto bundle = compile_kb(bad);
            require(has_rule(elicitation_review(bad, &bundle.net, &bundle.constraints), "R4"),
                    "R4 positive fixture");
            auto good = parse_or_die(R"(
fragment F { var D states ordered {near, far} prior (0.5, 0.5)
  var Det states {t,f} cpt (D) { (near) -> (0.9, 0.1) (far) -> (0.4, 0.6) } }
constraint monotone Det = t along D nonincreasing
model { use F })");
            auto ok = compile_kb(good);
            require(!has_rule(elicitation_review(good, &ok.net, &ok.constraints), "R4"),
                    "R4 negative fixture");
        }
        // R5
        require(has_rule(review_text(R"(
fragment F { var A states {t,f} prior (0.5, 0.5) }
scenario S { focus Ghost evidence A })"),
                         "R5"),
                "R5 positive fixture");
        require(!has_rule(review_text(R"(
fragment F { var A states {t,f} prior (0.5, 0.5) var B states {t,f} prior (0.5, 0.5) }
scenario S { focus A evidence B })"),
                          "R5"),
                "R5 negative fixture");
        // R6
        require(has_rule(review_text(
                    "stub fragment Z { var Q states {t,f} prior (0.5, 0.5) }"), "R6"),
                "R6 positive fixture");
        require(!has_rule(review_text(
                    "fragment Z { var Q states {t,f} prior (0.5, 0.5) }"), "R6"),
                "R6 negative fixture");
        // R7
        {
            KnowledgeBase cyc;
            ClassDecl a, b;
            a.name = "A";
            a.parent = "B";
            b.name = "B";
            b.parent = "A";
            cyc.classes = {a, b};
            require(has_rule(elicitation_review(cyc), "R7"), "R7 positive fixture (cycle)");
        }
        require(has_rule(review_text(R"(
class Orphan { states {a, b} }
fragment F { var A states {t,f} prior (0.5, 0.5) })"),
                         "R7"),
                "R7 positive fixture (unused)");
        require(!has_rule(review_text(R"(
class Used { states {t, f} }
fragment F { var A class Used prior (0.5, 0.5) })"),
                          "R7"),
                "R7 negative fixture");

        // deterministic finding order
        auto kb = parse_or_die(R"(
fragment F { var A states {t,f} prior (0.5, 0.6) var B states {t,f} prior (0.7, 0.7) }
scenario S { focus Ghost }
stub fragment Z { var Q states {t,f} prior (0.5, 0.5) }
)");
        auto first = elicitation_review(kb);
        auto second = elicitation_review(kb);
        require(first.size() == second.size(), "review not deterministic");
        for (std::size_t i = 0; i < first.size(); ++i) {
            require(first[i].rule == second[i].rule && first[i].message == second[i].message,
                    "review order not deterministic");
            if (i > 0) {
                const auto &x = first[i - 1], &y = first[i];
                bool ordered = x.location.file < y.location.file ||
                               (x.location.file == y.location.file &&
                                (x.location.line < y.location.line ||
                                 (x.location.line == y.location.line && x.rule <= y.rule)));
                require(ordered, "findings not ordered by (file, line, rule)");
            }
        }
    });

    if (h.failures == 0) std::printf("all criteria passed\n");
    return h.failures == 0 ? 0 : 1;
}
