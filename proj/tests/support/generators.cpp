#include "support/generators.hpp"

#include <algorithm>
#include <set>

#include "bnforge/cpt.hpp"
#include "bnforge/errors.hpp"

namespace bnforge::testgen {

CompiledNetwork make_net(const std::vector<VarSpec>& vars) {
    CompiledNetwork net;
    for (const auto& v : vars) {
        Variable var{v.name, StateSpace{v.states, v.ordered}, v.class_ref, ""};
        net.variables.push_back(var);
        net.parents[v.name] = v.parents;
        net.cpts[v.name] = v.rows;
        net.provenance[v.name] = {"(test)", CptForm::Explicit};
    }
    return net;
}

CompiledNetwork chain_ab() {
    return make_net({
        {"A", {"t", "f"}, {}, {{0.3, 0.7}}},
        {"B", {"t", "f"}, {"A"}, {{0.9, 0.1}, {0.2, 0.8}}},
    });
}

namespace {

std::vector<double> random_distribution(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    double sum = 0.0;
    for (auto& p : out) {
        p = 0.05 + static_cast<double>(rng.below(1000)) / 1000.0;
        sum += p;
    }
    for (auto& p : out) p /= sum;
    return out;
}

std::vector<std::string> space_of(std::size_t arity) {
    std::vector<std::string> states;
    for (std::size_t i = 0; i < arity; ++i) states.push_back("s" + std::to_string(i));
    return states;
}

} // namespace

CompiledNetwork random_network(Rng& rng, std::size_t n_vars, bool binary_only) {
    CompiledNetwork net;
    std::vector<StateSpace> spaces;
    for (std::size_t i = 0; i < n_vars; ++i) {
        std::string name = "V" + std::to_string(i / 10) + std::to_string(i % 10);
        std::size_t arity = binary_only ? 2 : 2 + rng.below(2);
        StateSpace space{space_of(arity), false};

        // up to 3 parents among the earlier variables
        std::vector<std::string> parents;
        std::vector<StateSpace> parent_spaces;
        if (i > 0) {
            std::size_t want = rng.below(std::min<std::size_t>(i, 3) + 1);
            std::set<std::size_t> picked;
            while (picked.size() < want) picked.insert(rng.below(i));
            for (std::size_t p : picked) {
                parents.push_back(net.variables[p].name);
                parent_spaces.push_back(net.variables[p].space);
            }
        }

        bool family_binary = space.size() == 2 &&
                             std::all_of(parent_spaces.begin(), parent_spaces.end(),
                                         [](const StateSpace& s) { return s.size() == 2; });
        std::size_t n_rows = config_count(parent_spaces);

        CptSpec spec = ExplicitCpt{};
        std::size_t pick = rng.below(4);
        if (pick == 1 && !parents.empty()) {
            // partition: group the configurations into 1-3 elements by
            // exact-config patterns
            PartitionCpt part;
            std::size_t n_elements = 1 + rng.below(std::min<std::size_t>(n_rows, 3));
            part.elements.resize(n_elements);
            for (auto& el : part.elements) el.dist = random_distribution(rng, space.size());
            for (std::size_t r = 0; r < n_rows; ++r) {
                auto cfg = decode_config(r, parent_spaces);
                ConfigPattern pat;
                for (std::size_t j = 0; j < cfg.size(); ++j)
                    pat.push_back(PatternTerm{false, {parent_spaces[j].states[cfg[j]]}});
                part.elements[rng.below(n_elements)].patterns.push_back(std::move(pat));
            }
            std::erase_if(part.elements,
                          [](const PartitionCpt::Element& el) { return el.patterns.empty(); });
            spec = std::move(part);
        } else if (pick == 2 && family_binary && !parents.empty()) {
            NoisyOrCpt nor;
            for (std::size_t j = 0; j < parents.size(); ++j)
                nor.link.push_back(static_cast<double>(rng.below(900) + 50) / 1000.0);
            nor.leak = static_cast<double>(rng.below(300)) / 1000.0;
            spec = std::move(nor);
        } else if (pick == 3 && !parents.empty()) {
            DeterministicCpt det;
            for (std::size_t r = 0; r < n_rows; ++r) {
                auto cfg = decode_config(r, parent_spaces);
                ConfigPattern pat;
                for (std::size_t j = 0; j < cfg.size(); ++j)
                    pat.push_back(PatternTerm{false, {parent_spaces[j].states[cfg[j]]}});
                det.rules.push_back({std::move(pat), space.states[rng.below(space.size())]});
            }
            spec = std::move(det);
        } else {
            ExplicitCpt exp;
            for (std::size_t r = 0; r < n_rows; ++r) {
                ExplicitCpt::Row row;
                auto cfg = decode_config(r, parent_spaces);
                for (std::size_t j = 0; j < cfg.size(); ++j)
                    row.config.push_back(parent_spaces[j].states[cfg[j]]);
                row.probs = random_distribution(rng, space.size());
                exp.rows.push_back(std::move(row));
            }
            spec = std::move(exp);
        }

        net.cpts[name] = expand_cpt(spec, space, parent_spaces);
        net.parents[name] = parents;
        net.provenance[name] = {"(test)", form_of(spec)};
        net.variables.push_back(Variable{name, space, "", ""});
        spaces.push_back(std::move(space));
    }
    return net;
}

Evidence random_evidence(Rng& rng, const CompiledNetwork& net) {
    Evidence e;
    for (const auto& v : net.variables)
        if (rng.below(100) < 30)
            e[v.name] = v.space.states[rng.below(v.space.size())];
    return e;
}

// --- random KBs -------------------------------------------------------------

namespace {

std::string fresh_name(Rng& rng, const char* prefix) {
    return std::string(prefix) + std::to_string(rng.below(100000));
}

VarDecl make_prior_var(Rng& rng, const std::string& name, std::size_t arity) {
    VarDecl v;
    v.name = name;
    v.states = StateSpace{space_of(arity), rng.below(2) == 0};
    ExplicitCpt prior;
    prior.rows.push_back({{}, random_distribution(rng, arity)});
    v.cpt = CptSpec{std::move(prior)};
    return v;
}

} // namespace

KnowledgeBase random_kb(Rng& rng) {
    KnowledgeBase kb;

    std::size_t n_defines = rng.below(3);
    for (std::size_t i = 0; i < n_defines; ++i) {
        DefineDecl d;
        d.name = "Def" + std::to_string(i);
        d.space = StateSpace{space_of(2 + rng.below(2)), rng.below(2) == 0};
        if (rng.below(2)) d.description = "shared definition " + std::to_string(i);
        if (rng.below(3) == 0) d.comments = {"registry entry " + std::to_string(i)};
        kb.definitions.push_back(std::move(d));
    }

    std::size_t n_classes = rng.below(3);
    for (std::size_t i = 0; i < n_classes; ++i) {
        ClassDecl c;
        c.name = "Class" + std::to_string(i);
        if (i > 0 && rng.below(2)) c.parent = "Class" + std::to_string(rng.below(i));
        if (rng.below(2)) c.states = StateSpace{space_of(2 + rng.below(2)), true};
        if (rng.below(2)) c.description = "class " + std::to_string(i);
        if (c.states && rng.below(2)) {
            ExplicitCpt prior;
            prior.rows.push_back({{}, random_distribution(rng, c.states->size())});
            c.default_cpt = CptSpec{std::move(prior)};
        }
        kb.classes.push_back(std::move(c));
    }

    std::size_t n_fragments = 1 + rng.below(3);
    for (std::size_t i = 0; i < n_fragments; ++i) {
        FragmentDecl f;
        f.name = "Frag" + std::to_string(i);
        f.is_stub = rng.below(4) == 0;
        if (rng.below(2)) f.description = "fragment number " + std::to_string(i);
        if (rng.below(3) == 0) f.comments = {"made by the generator"};

        std::size_t n_inputs = rng.below(2);
        std::vector<std::string> local;
        for (std::size_t j = 0; j < n_inputs; ++j) {
            InputDecl in;
            in.name = "In" + std::to_string(i) + std::to_string(j);
            in.states = StateSpace{space_of(2), false};
            local.push_back(in.name);
            f.items.emplace_back(std::move(in));
        }
        std::size_t n_vars = 1 + rng.below(3);
        std::vector<std::pair<std::string, StateSpace>> declared;
        for (std::size_t j = 0; j < n_vars; ++j) {
            std::string vname = "X" + std::to_string(i) + std::to_string(j);
            std::size_t arity = 2 + rng.below(2);
            VarDecl v;
            v.name = vname;
            v.states = StateSpace{space_of(arity), rng.below(2) == 0};
            if (rng.below(3) == 0) v.description = "variable " + vname;
            if (rng.below(4) == 0) v.comments = {"note on " + vname};

            // parents among the local names declared so far (keeps it a DAG)
            std::vector<std::pair<std::string, StateSpace>> parents;
            if (!declared.empty() && rng.below(2)) {
                std::size_t which = rng.below(declared.size());
                parents.push_back(declared[which]);
            }
            if (!local.empty() && rng.below(2))
                parents.emplace_back(local[rng.below(local.size())], StateSpace{space_of(2), false});

            if (parents.empty()) {
                ExplicitCpt prior;
                prior.rows.push_back({{}, random_distribution(rng, arity)});
                v.cpt = CptSpec{std::move(prior)};
            } else {
                for (const auto& [pname, pspace] : parents) v.parents.push_back(pname);
                std::vector<StateSpace> pspaces;
                for (const auto& [pname, pspace] : parents) pspaces.push_back(pspace);
                std::size_t pick = rng.below(3);
                if (pick == 0) {
                    ExplicitCpt exp;
                    std::size_t rows = config_count(pspaces);
                    for (std::size_t r = 0; r < rows; ++r) {
                        ExplicitCpt::Row row;
                        auto cfg = decode_config(r, pspaces);
                        for (std::size_t d = 0; d < cfg.size(); ++d)
                            row.config.push_back(pspaces[d].states[cfg[d]]);
                        row.probs = random_distribution(rng, arity);
                        exp.rows.push_back(std::move(row));
                    }
                    v.cpt = CptSpec{std::move(exp)};
                } else if (pick == 1) {
                    PartitionCpt part;
                    PartitionCpt::Element all;
                    all.patterns.push_back(ConfigPattern(pspaces.size(), PatternTerm{true, {}}));
                    all.rationale = rng.below(2) ? "uniform treatment" : "";
                    all.dist = random_distribution(rng, arity);
                    part.elements.push_back(std::move(all));
                    v.cpt = CptSpec{std::move(part)};
                } else {
                    DeterministicCpt det;
                    ConfigPattern rest(pspaces.size(), PatternTerm{true, {}});
                    ConfigPattern first;
                    for (const auto& s : pspaces)
                        first.push_back(PatternTerm{false, {s.states[0]}});
                    // first config -> state 0, everything else -> state 1
                    det.rules.push_back({first, v.states->states[0]});
                    for (std::size_t d = 0; d < pspaces.size(); ++d) {
                        ConfigPattern pat;
                        for (std::size_t d2 = 0; d2 < pspaces.size(); ++d2) {
                            if (d2 < d)
                                pat.push_back(PatternTerm{false, {pspaces[d2].states[0]}});
                            else if (d2 == d) {
                                PatternTerm t;
                                t.states.assign(pspaces[d2].states.begin() + 1,
                                                pspaces[d2].states.end());
                                pat.push_back(std::move(t));
                            } else
                                pat.push_back(PatternTerm{true, {}});
                        }
                        det.rules.push_back({std::move(pat), v.states->states[1]});
                    }
                    v.cpt = CptSpec{std::move(det)};
                }
            }
            declared.emplace_back(vname, *v.states);
            local.push_back(vname);
            f.items.emplace_back(std::move(v));
        }
        kb.fragments.push_back(std::move(f));
    }

    if (rng.below(2)) {
        TemplateDecl t;
        t.name = "Tmpl" + std::to_string(rng.below(10));
        t.params.push_back({"X", TemplateParam::Kind::Ident});
        t.params.push_back({"R", TemplateParam::Kind::States});
        t.body = "var \"Out $X\" states $R prior (0.5, 0.5)";
        kb.templates.push_back(std::move(t));
    }

    if (rng.below(2) && !kb.fragments.empty()) {
        const auto& f = kb.fragments[0];
        auto vars = f.vars();
        if (!vars.empty()) {
            ScenarioDecl s;
            s.name = "Scen" + std::to_string(rng.below(10));
            s.description = "generated scenario";
            s.focus.push_back(vars[0]->name);
            if (vars.size() > 1) {
                ScenarioDecl::EvidenceVar ev;
                ev.variable = vars[1]->name;
                s.evidence.push_back(std::move(ev));
            }
            if (rng.below(2)) {
                s.generation.exhaustive = false;
                s.generation.samples = 1 + rng.below(5);
                s.generation.seed = rng.below(1000);
                s.generation.outside = false;
            }
            kb.scenarios.push_back(std::move(s));
        }
    }

    if (rng.below(2) && !kb.fragments.empty()) {
        auto vars = kb.fragments[0].vars();
        if (!vars.empty() && !vars[0]->parents.empty()) {
            // inequality over the first var's single parent when it has one
        }
        TopConstraint tc;
        MonotoneConstraint m;
        m.child = vars[0]->name;
        m.target_state = vars[0]->states->states[0];
        m.parent = "NoSuchParent"; // dangling refs are legal at parse level
        m.direction = rng.below(2) ? Direction::NonIncreasing : Direction::NonDecreasing;
        tc.constraint = std::move(m);
        kb.constraints.push_back(std::move(tc));
    }

    return kb;
}

void random_edit(Rng& rng, KnowledgeBase& kb) {
    for (int attempt = 0; attempt < 20; ++attempt) {
        switch (rng.below(8)) {
            case 0: { // tweak an explicit row
                if (kb.fragments.empty()) break;
                auto& f = kb.fragments[rng.below(kb.fragments.size())];
                for (auto& item : f.items) {
                    auto* v = std::get_if<VarDecl>(&item);
                    if (!v || !v->cpt) continue;
                    auto* e = std::get_if<ExplicitCpt>(&*v->cpt);
                    if (!e || e->rows.empty()) continue;
                    auto& row = e->rows[rng.below(e->rows.size())];
                    row.probs = random_distribution(rng, row.probs.size());
                    return;
                }
                break;
            }
            case 1: { // add a root variable
                if (kb.fragments.empty()) break;
                auto& f = kb.fragments[rng.below(kb.fragments.size())];
                f.items.emplace_back(make_prior_var(rng, fresh_name(rng, "New"), 2 + rng.below(2)));
                return;
            }
            case 2: { // drop a variable nothing references locally
                if (kb.fragments.empty()) break;
                auto& f = kb.fragments[rng.below(kb.fragments.size())];
                for (std::size_t i = 0; i < f.items.size(); ++i) {
                    const auto* v = std::get_if<VarDecl>(&f.items[i]);
                    if (!v) continue;
                    bool referenced = false;
                    for (const auto* other : f.vars())
                        for (const auto& p : other->parents)
                            if (p == v->name) referenced = true;
                    if (referenced) continue;
                    f.items.erase(f.items.begin() + static_cast<long>(i));
                    return;
                }
                break;
            }
            case 3: { // add a definition
                DefineDecl d;
                d.name = fresh_name(rng, "Def");
                d.space = StateSpace{space_of(2 + rng.below(2)), false};
                kb.definitions.push_back(std::move(d));
                return;
            }
            case 4: { // edit a description
                if (kb.fragments.empty()) break;
                auto& f = kb.fragments[rng.below(kb.fragments.size())];
                f.description = "revised " + std::to_string(rng.below(100000));
                return;
            }
            case 5: { // add a whole fragment
                FragmentDecl f;
                f.name = fresh_name(rng, "FragNew");
                f.items.emplace_back(make_prior_var(rng, "Solo", 2));
                kb.fragments.push_back(std::move(f));
                return;
            }
            case 6: { // add or remove a scenario
                if (!kb.scenarios.empty() && rng.below(2)) {
                    kb.scenarios.erase(kb.scenarios.begin() +
                                       static_cast<long>(rng.below(kb.scenarios.size())));
                    return;
                }
                ScenarioDecl s;
                s.name = fresh_name(rng, "Scen");
                s.focus.push_back("Anything");
                kb.scenarios.push_back(std::move(s));
                return;
            }
            case 7: { // add or remove a constraint
                if (!kb.constraints.empty() && rng.below(2)) {
                    kb.constraints.erase(kb.constraints.begin() +
                                         static_cast<long>(rng.below(kb.constraints.size())));
                    return;
                }
                TopConstraint tc;
                MonotoneConstraint m;
                m.child = fresh_name(rng, "C");
                m.target_state = "s0";
                m.parent = fresh_name(rng, "P");
                tc.constraint = std::move(m);
                kb.constraints.push_back(std::move(tc));
                return;
            }
        }
    }
}

} // namespace bnforge::testgen
