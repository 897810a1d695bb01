#include "bnforge/review.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "bnforge/classes.hpp"
#include "bnforge/errors.hpp"

namespace bnforge {

namespace {

struct Reviewer {
    const KnowledgeBase& kb;
    const CompiledNetwork* net;
    const std::vector<std::pair<Constraint, SourceSpan>>* constraints;
    std::vector<ReviewFinding> findings;

    void add(const char* rule, Severity sev, const SourceSpan& at, std::string msg) {
        findings.push_back({rule, sev, at, std::move(msg)});
    }

    static std::string space_text(const StateSpace& s) {
        std::string out = "{";
        for (std::size_t i = 0; i < s.states.size(); ++i) {
            if (i) out += ", ";
            out += s.states[i];
        }
        return out + "}";
    }

    // R1: one name, one state space, across fragments and the registry
    void r1() {
        struct Use {
            const StateSpace* space;
            std::string where;
            SourceSpan at;
        };
        std::map<std::string, std::vector<Use>> uses;
        for (const auto& d : kb.definitions)
            uses[d.name].push_back({&d.space, "definition registry", d.span});
        for (const auto& f : kb.fragments) {
            for (const auto* in : f.inputs())
                if (in->states) uses[in->name].push_back({&*in->states, "fragment '" + f.name + "'", in->span});
            for (const auto* v : f.vars())
                if (v->states) uses[v->name].push_back({&*v->states, "fragment '" + f.name + "'", v->span});
        }
        for (const auto& [name, list] : uses) {
            for (std::size_t i = 1; i < list.size(); ++i) {
                if (*list[i].space == *list[0].space) continue;
                add("R1", Severity::Error, list[i].at,
                    "variable '" + name + "' has state space " + space_text(*list[i].space) + " in " +
                        list[i].where + " but " + space_text(*list[0].space) + " in " + list[0].where);
            }
        }
    }

    // R2: rows and partition distributions must normalize
    void r2() {
        auto check_row = [&](const std::vector<double>& row, const SourceSpan& at,
                             const std::string& what) {
            double sum = 0.0;
            for (double p : row) sum += p;
            if (std::fabs(sum - 1.0) > kRowSumTolerance) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.12g", sum);
                add("R2", Severity::Error, at, what + " sums to " + buf);
            }
        };
        for (const auto& f : kb.fragments) {
            for (const auto* v : f.vars()) {
                if (!v->cpt) continue;
                if (const auto* e = std::get_if<ExplicitCpt>(&*v->cpt)) {
                    for (const auto& row : e->rows)
                        check_row(row.probs, v->cpt_span,
                                  "row of '" + v->name + "' in fragment '" + f.name + "'");
                } else if (const auto* p = std::get_if<PartitionCpt>(&*v->cpt)) {
                    for (std::size_t i = 0; i < p->elements.size(); ++i) {
                        SourceSpan at = i < v->element_spans.size() ? v->element_spans[i] : v->cpt_span;
                        check_row(p->elements[i].dist, at,
                                  "partition element of '" + v->name + "' in fragment '" + f.name + "'");
                    }
                }
            }
        }
        for (const auto& e : kb.composition.exogenous) {
            double sum = 0.0;
            for (double p : e.prior) sum += p;
            if (std::fabs(sum - 1.0) > kRowSumTolerance)
                add("R2", Severity::Error, e.span, "exogenous prior of '" + e.variable + "' sums to " +
                                                       std::to_string(sum));
        }
    }

    // R3: equal rows outside a declared partition; empty rationales
    void r3() {
        for (const auto& f : kb.fragments) {
            for (const auto* v : f.vars()) {
                if (!v->cpt) continue;
                if (const auto* e = std::get_if<ExplicitCpt>(&*v->cpt)) {
                    if (e->rows.size() < 2) continue;
                    std::map<std::vector<double>, std::vector<const ExplicitCpt::Row*>> groups;
                    for (const auto& row : e->rows) groups[row.probs].push_back(&row);
                    for (const auto& [probs, rows] : groups) {
                        if (rows.size() < 2) continue;
                        std::string configs;
                        for (std::size_t i = 0; i < rows.size(); ++i) {
                            if (i) configs += ", ";
                            configs += "(";
                            for (std::size_t j = 0; j < rows[i]->config.size(); ++j) {
                                if (j) configs += ",";
                                configs += rows[i]->config[j];
                            }
                            configs += ")";
                        }
                        add("R3", Severity::Warning, v->cpt_span,
                            "possible accidental equality: rows " + configs + " of '" + v->name +
                                "' in fragment '" + f.name +
                                "' are identical but not grouped by a declared partition");
                    }
                } else if (const auto* p = std::get_if<PartitionCpt>(&*v->cpt)) {
                    for (std::size_t i = 0; i < p->elements.size(); ++i) {
                        if (!p->elements[i].rationale.empty()) continue;
                        SourceSpan at = i < v->element_spans.size() ? v->element_spans[i] : v->cpt_span;
                        add("R3", Severity::Info, at,
                            "partition element " + std::to_string(i + 1) + " of '" + v->name +
                                "' in fragment '" + f.name + "' has no rationale");
                    }
                }
            }
        }
    }

    // R4: declared constraints, delegated to check_constraints
    void r4() {
        if (!net || !constraints) return;
        std::vector<Constraint> cs;
        for (const auto& [c, span] : *constraints) cs.push_back(c);
        ConstraintReport report;
        try {
            report = check_constraints(*net, cs);
        } catch (const RefError&) {
            return; // unresolvable references are R5's findings
        }
        for (const auto& v : report.violations) {
            SourceSpan at = (*constraints)[v.constraint_index].second;
            add("R4", Severity::Error, at, "constraint violated: " + v.message);
        }
    }

    // R5: dangling references
    void r5() {
        std::set<std::string> vars; // every variable name any fragment mentions
        for (const auto& f : kb.fragments) {
            for (const auto* in : f.inputs()) vars.insert(in->name);
            for (const auto* v : f.vars()) vars.insert(v->name);
        }
        if (net)
            for (const auto& v : net->variables) vars.insert(v.name);

        auto known = [&](const std::string& name) {
            if (net && net->find(name)) return true;
            return vars.count(name) > 0;
        };

        for (const auto& s : kb.scenarios) {
            for (const auto& fv : s.focus)
                if (!known(fv))
                    add("R5", Severity::Error, s.span,
                        "scenario '" + s.name + "' references unknown focus variable '" + fv + "'");
            for (const auto& ev : s.evidence)
                if (!known(ev.variable))
                    add("R5", Severity::Error, s.span,
                        "scenario '" + s.name + "' references unknown evidence variable '" +
                            ev.variable + "'");
        }
        for (const auto& tc : kb.constraints) {
            auto check = [&](const std::string& name) {
                if (!known(name))
                    add("R5", Severity::Error, tc.span, "constraint references unknown variable '" +
                                                            name + "'");
            };
            if (const auto* m = std::get_if<MonotoneConstraint>(&tc.constraint)) {
                check(m->child);
                check(m->parent);
            } else {
                const auto& iq = std::get<InequalityConstraint>(tc.constraint);
                check(iq.child);
                for (const auto& [k, v] : iq.config_a) check(k);
                for (const auto& [k, v] : iq.config_b) check(k);
            }
        }
        for (const auto& b : kb.composition.binds) {
            const FragmentDecl* from = kb.find_fragment(b.from_fragment);
            if (from && !from->find_input(b.from_input))
                add("R5", Severity::Error, b.span,
                    "bind references unknown input '" + b.from_fragment + "." + b.from_input + "'");
            const FragmentDecl* to = kb.find_fragment(b.to_fragment);
            if (to && !to->find_var(b.to_resident))
                add("R5", Severity::Error, b.span,
                    "bind references unknown resident '" + b.to_fragment + "." + b.to_resident + "'");
        }
        for (const auto& e : kb.composition.exogenous) {
            bool used = false;
            for (const auto& f : kb.fragments)
                if (f.find_input(e.variable)) used = true;
            if (!used)
                add("R5", Severity::Error, e.span,
                    "exogenous declaration for '" + e.variable + "' matches no fragment input");
        }
    }

    // R6: stub inventory
    void r6() {
        for (const auto& f : kb.fragments) {
            if (!f.is_stub) continue;
            std::string names;
            for (const auto* v : f.vars()) {
                if (!names.empty()) names += ", ";
                names += v->name;
            }
            add("R6", Severity::Info, f.span,
                "stub fragment '" + f.name + "' stands in for an unprototyped component (variables: " +
                    names + ")");
        }
    }

    // R7: class-hierarchy health
    void r7() {
        for (const auto& c : kb.classes) {
            try {
                resolve_class(c.name, kb.classes);
            } catch (const RefError& e) {
                add("R7", Severity::Error, c.span, e.what());
                continue;
            }
        }
        // a class is used when a variable references it or one of its subclasses
        std::set<std::string> used;
        for (const auto& f : kb.fragments)
            for (const auto* v : f.vars())
                if (v->class_ref)
                    for (const auto& c : kb.classes)
                        if (class_is_a(*v->class_ref, c.name, kb.classes)) used.insert(c.name);
        for (const auto& c : kb.classes)
            if (!used.count(c.name))
                add("R7", Severity::Info, c.span,
                    "class '" + c.name + "' is not referenced by any variable");
    }
};

} // namespace

std::vector<ReviewFinding> elicitation_review(
    const KnowledgeBase& kb, const CompiledNetwork* compiled,
    const std::vector<std::pair<Constraint, SourceSpan>>* constraints) {
    Reviewer r{kb, compiled, constraints, {}};
    r.r1();
    r.r2();
    r.r3();
    r.r4();
    r.r5();
    r.r6();
    r.r7();
    std::sort(r.findings.begin(), r.findings.end(), [](const ReviewFinding& a, const ReviewFinding& b) {
        if (a.location.file != b.location.file) return a.location.file < b.location.file;
        if (a.location.line != b.location.line) return a.location.line < b.location.line;
        if (a.rule != b.rule) return a.rule < b.rule;
        if (a.location.column != b.location.column) return a.location.column < b.location.column;
        return a.message < b.message;
    });
    return r.findings;
}

} // namespace bnforge
