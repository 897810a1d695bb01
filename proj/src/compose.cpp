#include "bnforge/compose.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "bnforge/classes.hpp"
#include "bnforge/errors.hpp"
#include "bnforge/sha256.hpp"
#include "bnforge/templates.hpp"
#include "render.hpp"

namespace bnforge {

std::vector<FragmentDecl> resolve_spaces(const std::vector<FragmentDecl>& fragments,
                                         const std::vector<ClassDecl>& hierarchy,
                                         const std::vector<DefineDecl>& definitions) {
    auto defined = [&](const std::string& name) -> const StateSpace* {
        for (const auto& d : definitions)
            if (d.name == name) return &d.space;
        return nullptr;
    };

    std::vector<FragmentDecl> out = fragments;
    for (auto& f : out) {
        for (auto& item : f.items) {
            if (auto* in = std::get_if<InputDecl>(&item)) {
                if (in->states) continue;
                if (const StateSpace* s = defined(in->name)) {
                    in->states = *s;
                    continue;
                }
                throw RefError("input '" + in->name + "' of fragment '" + f.name +
                               "' has no state space (not declared, not defined)");
            }
            auto& v = std::get<VarDecl>(item);
            if (v.states) continue;
            if (v.class_ref) {
                auto features = resolve_class(*v.class_ref, hierarchy);
                if (features.states) {
                    v.states = *features.states;
                    continue;
                }
            }
            if (const StateSpace* s = defined(v.name)) {
                v.states = *s;
                continue;
            }
            throw RefError("variable '" + v.name + "' of fragment '" + f.name +
                           "' has no state space (not declared, no class feature, not defined)");
        }
    }
    return out;
}

namespace {

const FragmentDecl* find_fragment(const std::vector<FragmentDecl>& fs, const std::string& name) {
    for (const auto& f : fs)
        if (f.name == name) return &f;
    return nullptr;
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += sep;
        s += xs[i];
    }
    return s;
}

} // namespace

ComposedModel compose(const std::vector<FragmentDecl>& fragments,
                      const std::vector<BindDirective>& binds,
                      const std::vector<ExogenousDirective>& exogenous) {
    ComposedModel model;
    model.fragments = fragments;
    model.binds = binds;
    model.exogenous = exogenous;

    std::set<std::string> names;
    for (const auto& f : fragments)
        if (!names.insert(f.name).second)
            throw RefError("fragment name '" + f.name + "' is not distinct");

    // S1: one home per merged variable
    std::map<std::string, const VarDecl*> home_var;
    for (const auto& f : fragments) {
        for (const auto* v : f.vars()) {
            auto [it, fresh] = model.home.emplace(v->name, f.name);
            if (!fresh)
                throw ComposeError(ComposeError::Kind::HomeConflict,
                                   "variable '" + v->name + "' is resident in both '" + it->second +
                                       "' and '" + f.name + "'");
            home_var[v->name] = v;
        }
    }

    std::map<std::string, const ExogenousDirective*> exo;
    for (const auto& e : exogenous) {
        exo[e.variable] = &e;
        auto hit = model.home.find(e.variable);
        if (hit != model.home.end())
            throw ComposeError(ComposeError::Kind::HomeConflict,
                               "exogenous declaration for '" + e.variable +
                                   "' conflicts with resident variable in '" + hit->second + "'");
    }

    // bindings: validate endpoints, check S2, fill the alias map
    for (const auto& b : binds) {
        const FragmentDecl* from = find_fragment(fragments, b.from_fragment);
        if (!from) throw RefError("bind references unknown fragment '" + b.from_fragment + "'");
        const InputDecl* in = from->find_input(b.from_input);
        if (!in)
            throw RefError("fragment '" + b.from_fragment + "' has no input '" + b.from_input + "'");
        const FragmentDecl* to = find_fragment(fragments, b.to_fragment);
        if (!to) throw RefError("bind references unknown fragment '" + b.to_fragment + "'");
        const VarDecl* res = to->find_var(b.to_resident);
        if (!res)
            throw RefError("fragment '" + b.to_fragment + "' has no resident variable '" +
                           b.to_resident + "'");
        if (!in->states || !res->states)
            throw RefError("state spaces not resolved before compose");
        if (!(*in->states == *res->states))
            throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                               "bind " + b.from_fragment + "." + b.from_input + " -> " +
                                   b.to_fragment + "." + b.to_resident + ": state spaces differ");
        model.alias[{b.from_fragment, b.from_input}] = res->name;
    }

    // S4: unbound inputs must be exogenous-with-prior; same-named exogenous
    // users merge into one root and must agree on the space
    std::map<std::string, StateSpace> exo_space;
    for (const auto& f : fragments) {
        for (const auto* in : f.inputs()) {
            if (model.alias.count({f.name, in->name})) continue;
            auto eit = exo.find(in->name);
            if (eit == exo.end())
                throw ComposeError(ComposeError::Kind::UnboundInput,
                                   "input '" + in->name + "' of fragment '" + f.name +
                                       "' is neither bound nor declared exogenous");
            auto [sit, fresh] = exo_space.emplace(in->name, *in->states);
            if (!fresh && !(sit->second == *in->states))
                throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                                   "exogenous '" + in->name +
                                       "' is used with differing state spaces");
            model.alias[{f.name, in->name}] = in->name;
            model.home.emplace(in->name, "(exogenous)");
        }
    }

    // merged graph
    for (const auto& [name, fragment] : model.home) model.parents[name];
    for (const auto& f : fragments) {
        for (const auto* v : f.vars()) {
            std::vector<std::string> ps;
            for (const auto& p : v->parents) {
                if (f.find_var(p)) {
                    ps.push_back(p);
                } else {
                    auto ait = model.alias.find({f.name, p});
                    if (ait == model.alias.end())
                        throw RefError("parent '" + p + "' of '" + v->name + "' did not resolve");
                    ps.push_back(ait->second);
                }
            }
            model.parents[v->name] = std::move(ps);
        }
    }

    // S3: acyclicity of the merged graph
    {
        std::map<std::string, int> color;
        std::vector<std::string> cycle;
        std::function<bool(const std::string&)> visit = [&](const std::string& n) -> bool {
            int& c = color[n];
            if (c == 1) {
                cycle.push_back(n);
                return false;
            }
            if (c == 2) return true;
            c = 1;
            for (const auto& p : model.parents.at(n))
                if (!visit(p)) {
                    if (cycle.size() < 2 || cycle.front() != n) cycle.push_back(n);
                    return false;
                }
            c = 2;
            return true;
        };
        for (const auto& [n, ps] : model.parents)
            if (!visit(n)) {
                std::sort(cycle.begin(), cycle.end());
                cycle.erase(std::unique(cycle.begin(), cycle.end()), cycle.end());
                throw ComposeError(ComposeError::Kind::CrossCycle,
                                   "composition creates a cycle: " + join(cycle, ", "));
            }
    }

    return model;
}

ComposedModel substitute_stub(const ComposedModel& model, const std::string& stub_name,
                              const FragmentDecl& replacement) {
    const FragmentDecl* stub = find_fragment(model.fragments, stub_name);
    if (!stub) throw RefError("no fragment named '" + stub_name + "' in the composition");

    auto space_of_input = [](const FragmentDecl& f, const std::string& n) -> const StateSpace* {
        const InputDecl* in = f.find_input(n);
        return in && in->states ? &*in->states : nullptr;
    };
    auto space_of_var = [](const FragmentDecl& f, const std::string& n) -> const StateSpace* {
        const VarDecl* v = f.find_var(n);
        return v && v->states ? &*v->states : nullptr;
    };

    // replacement must expose the stub's inputs ...
    for (const auto* in : stub->inputs()) {
        const StateSpace* rs = space_of_input(replacement, in->name);
        if (!rs)
            throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                               "replacement '" + replacement.name + "' lacks input '" + in->name +
                                   "' of stub '" + stub_name + "'");
        if (!(*rs == *in->states))
            throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                               "replacement input '" + in->name + "' has a different state space");
    }
    // ... and every stub resident referenced by a binding
    for (const auto& b : model.binds) {
        if (b.to_fragment != stub_name) continue;
        const StateSpace* ss = space_of_var(*stub, b.to_resident);
        const StateSpace* rs = space_of_var(replacement, b.to_resident);
        if (!rs)
            throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                               "replacement '" + replacement.name + "' lacks boundary variable '" +
                                   b.to_resident + "' of stub '" + stub_name + "'");
        if (!ss || !(*rs == *ss))
            throw ComposeError(ComposeError::Kind::InterfaceMismatch,
                               "replacement boundary variable '" + b.to_resident +
                                   "' has a different state space");
    }

    std::vector<FragmentDecl> fragments;
    for (const auto& f : model.fragments)
        if (f.name != stub_name) fragments.push_back(f);
    fragments.push_back(replacement);

    std::vector<BindDirective> binds = model.binds;
    for (auto& b : binds) {
        if (b.from_fragment == stub_name) b.from_fragment = replacement.name;
        if (b.to_fragment == stub_name) b.to_fragment = replacement.name;
    }
    return compose(fragments, binds, model.exogenous);
}

CompiledNetwork compile(const ComposedModel& model, const std::vector<ClassDecl>& hierarchy) {
    // canonical topological order: Kahn with a min-name heap
    std::map<std::string, std::vector<std::string>> children;
    std::map<std::string, std::size_t> indegree;
    for (const auto& [name, ps] : model.parents) {
        indegree[name] = ps.size();
        for (const auto& p : ps) children[p].push_back(name);
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [name, deg] : indegree)
        if (deg == 0) ready.push(name);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string n = ready.top();
        ready.pop();
        order.push_back(n);
        for (const auto& c : children[n])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (order.size() != model.parents.size())
        throw Error("internal: composed model is not acyclic at compile time");

    std::map<std::string, const VarDecl*> home_var;
    std::map<std::string, std::string> home_fragment;
    for (const auto& f : model.fragments)
        for (const auto* v : f.vars()) {
            home_var[v->name] = v;
            home_fragment[v->name] = f.name;
        }
    std::map<std::string, const ExogenousDirective*> exo;
    for (const auto& e : model.exogenous) exo[e.variable] = &e;
    std::map<std::string, const StateSpace*> exo_space;
    for (const auto& f : model.fragments)
        for (const auto* in : f.inputs()) {
            auto ait = model.alias.find({f.name, in->name});
            if (ait != model.alias.end() && ait->second == in->name && exo.count(in->name))
                exo_space.emplace(in->name, &*in->states);
        }

    CompiledNetwork net;
    for (const auto& name : order) {
        auto hit = home_var.find(name);
        if (hit == home_var.end()) {
            // exogenous root
            auto eit = exo.find(name);
            auto sit = exo_space.find(name);
            if (eit == exo.end() || sit == exo_space.end())
                throw Error("internal: no home and no exogenous declaration for '" + name + "'");
            Variable var{name, *sit->second, "", ""};
            ExplicitCpt prior;
            prior.rows.push_back({{}, eit->second->prior});
            net.cpts[name] = expand_cpt(CptSpec{prior}, var.space, {});
            net.parents[name] = {};
            net.provenance[name] = {"(exogenous)", CptForm::Explicit};
            net.variables.push_back(std::move(var));
            continue;
        }

        const VarDecl& v = *hit->second;
        Variable var{name, *v.states, v.class_ref.value_or(""), v.description};
        const CptSpec* spec = v.cpt ? &*v.cpt : nullptr;
        std::optional<CptSpec> class_default;
        if (v.class_ref) {
            auto features = resolve_class(*v.class_ref, hierarchy);
            if (var.description.empty() && features.description)
                var.description = *features.description;
            if (!spec && features.default_cpt) {
                class_default = features.default_cpt;
                spec = &*class_default;
            }
        }
        if (!spec)
            throw RefError("variable '" + name + "' has no CPT and no class default");

        const auto& merged_parents = model.parents.at(name);
        std::vector<StateSpace> parent_spaces;
        for (const auto& p : merged_parents) {
            auto ph = home_var.find(p);
            if (ph != home_var.end())
                parent_spaces.push_back(*ph->second->states);
            else
                parent_spaces.push_back(*exo_space.at(p));
        }
        net.cpts[name] = expand_cpt(*spec, var.space, parent_spaces);
        net.parents[name] = merged_parents;
        net.provenance[name] = {home_fragment.at(name), form_of(*spec)};
        net.variables.push_back(std::move(var));
    }
    return net;
}

std::vector<std::pair<Constraint, SourceSpan>> collect_constraints(const KnowledgeBase& kb,
                                                                   const CompiledNetwork& net) {
    std::vector<std::pair<Constraint, SourceSpan>> out;
    for (const auto& tc : kb.constraints) out.emplace_back(tc.constraint, tc.span);

    for (const auto& v : net.variables) {
        if (v.class_ref.empty()) continue;
        auto features = resolve_class(v.class_ref, kb.classes);
        for (const auto& cc : features.constraints) {
            for (const auto& pname : net.parents.at(v.name)) {
                const Variable* p = net.find(pname);
                if (!p || p->class_ref.empty()) continue;
                if (!class_is_a(p->class_ref, cc.parent_class, kb.classes)) continue;
                MonotoneConstraint m{v.name, cc.target_state, pname, cc.direction};
                out.emplace_back(Constraint{std::move(m)}, cc.span);
            }
        }
    }
    return out;
}

ComposedModel assemble(const KnowledgeBase& kb) {
    std::vector<FragmentDecl> pool = kb.fragments;
    std::vector<std::string> instantiated;
    for (const auto& d : kb.composition.instantiate) {
        const TemplateDecl* tmpl = kb.find_template(d.template_name);
        if (!tmpl) throw RefError("unknown template '" + d.template_name + "'");
        auto result = instantiate_template(*tmpl, d.args);
        if (!result.ok()) {
            std::string msg = "instantiating template '" + d.template_name + "' failed:";
            for (const auto& diag : result.diagnostics) msg += " " + diag.message + ";";
            throw Error(msg);
        }
        instantiated.push_back(result.fragment->name);
        pool.push_back(std::move(*result.fragment));
    }

    std::vector<FragmentDecl> selected;
    if (kb.composition.present) {
        std::set<std::string> wanted(kb.composition.use.begin(), kb.composition.use.end());
        wanted.insert(instantiated.begin(), instantiated.end());
        for (const auto& f : pool)
            if (wanted.count(f.name)) selected.push_back(f);
        for (const auto& w : wanted)
            if (!find_fragment(pool, w)) throw RefError("use of unknown fragment '" + w + "'");
    } else {
        selected = pool;
    }

    auto resolved = resolve_spaces(selected, kb.classes, kb.definitions);
    return compose(resolved, kb.composition.binds, kb.composition.exogenous);
}

CompiledBundle compile_kb(const KnowledgeBase& kb) {
    CompiledBundle bundle;
    bundle.net = compile(assemble(kb), kb.classes);
    bundle.constraints = collect_constraints(kb, bundle.net);
    return bundle;
}

std::string network_content_hash(const CompiledNetwork& net) {
    std::string text;
    for (const auto& v : net.variables) {
        text += render::name(v.name) + " " + render::states_clause(v.space);
        if (!v.class_ref.empty()) text += " class " + render::name(v.class_ref);
        text += " <- (";
        const auto& ps = net.parents.at(v.name);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (i) text += ", ";
            text += render::name(ps[i]);
        }
        text += ")";
        const auto& prov = net.provenance.at(v.name);
        text += " from " + render::name(prov.fragment) + " " + to_string(prov.form) + "\n";
        for (const auto& row : net.cpts.at(v.name)) text += render::prob_vector(row) + "\n";
    }
    return sha256_hex(text);
}

} // namespace bnforge
