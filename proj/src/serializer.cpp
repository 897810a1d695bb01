#include <algorithm>
#include <charconv>

#include "bnforge/kb.hpp"
#include "lexer.hpp"
#include "render.hpp"

namespace bnforge {

namespace render {

std::string name(const std::string& n) {
    if (is_bare_ident(n)) return n;
    std::string out = "\"";
    for (char c : n) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c; break;
        }
    }
    out += '"';
    return out;
}

std::string number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string prob_vector(const std::vector<double>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += number(v[i]);
    }
    return out + ")";
}

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c; break;
        }
    }
    return out + "\"";
}

std::string name_list(const std::vector<std::string>& names) {
    std::string out = "(";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += name(names[i]);
    }
    return out + ")";
}

std::string label_set(const std::vector<std::string>& labels) {
    std::string out = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += name(labels[i]);
    }
    return out + "}";
}

std::string pattern(const ConfigPattern& pat) {
    std::string out = "(";
    for (std::size_t i = 0; i < pat.size(); ++i) {
        if (i) out += ", ";
        if (pat[i].wildcard)
            out += "*";
        else if (pat[i].states.size() == 1)
            out += name(pat[i].states[0]);
        else
            out += label_set(pat[i].states);
    }
    return out + ")";
}

void append_comments(std::string& out, const std::vector<std::string>& comments,
                     const std::string& indent) {
    for (const auto& c : comments) out += indent + "# " + c + "\n";
}

} // namespace

std::string states_clause(const StateSpace& s) {
    std::string out = "states ";
    if (s.ordered) out += "ordered ";
    out += label_set(s.states);
    return out;
}

std::string cpt_clause(const std::vector<std::string>& parents, const CptSpec& spec,
                       const std::string& indent) {
    std::string out;
    if (const auto* e = std::get_if<ExplicitCpt>(&spec)) {
        if (parents.empty() && e->rows.size() == 1 && e->rows[0].config.empty())
            return "prior " + prob_vector(e->rows[0].probs);
        out = "cpt " + name_list(parents) + " {\n";
        // rows are map-like, keyed by configuration: sorted for canonical form
        std::vector<const ExplicitCpt::Row*> rows;
        for (const auto& r : e->rows) rows.push_back(&r);
        std::sort(rows.begin(), rows.end(),
                  [](const auto* a, const auto* b) { return a->config < b->config; });
        for (const auto* r : rows)
            out += indent + "  " + name_list(r->config) + " -> " + prob_vector(r->probs) + "\n";
        out += indent + "}";
        return out;
    }
    if (const auto* p = std::get_if<PartitionCpt>(&spec)) {
        out = "partition " + name_list(parents) + " {\n";
        for (const auto& el : p->elements) {
            out += indent + "  element";
            for (const auto& pat : el.patterns) out += " " + pattern(pat);
            if (!el.rationale.empty()) out += " rationale " + quoted(el.rationale);
            out += " -> " + prob_vector(el.dist) + "\n";
        }
        out += indent + "}";
        return out;
    }
    if (const auto* n = std::get_if<NoisyOrCpt>(&spec)) {
        out = "noisyor (";
        for (std::size_t i = 0; i < parents.size(); ++i) {
            if (i) out += ", ";
            out += name(parents[i]) + ": " + number(n->link[i]);
        }
        out += ") leak " + number(n->leak);
        return out;
    }
    const auto& d = std::get<DeterministicCpt>(spec);
    out = "deterministic " + name_list(parents) + " {\n";
    for (const auto& rule : d.rules)
        out += indent + "  " + pattern(rule.pattern) + " -> " + name(rule.output) + "\n";
    out += indent + "}";
    return out;
}

std::string define_decl(const DefineDecl& d) {
    std::string out = "define " + name(d.name) + " " + states_clause(d.space);
    if (!d.description.empty()) out += " description " + quoted(d.description);
    return out;
}

std::string class_decl(const ClassDecl& c) {
    std::string out = "class " + name(c.name);
    if (c.parent) out += " extends " + name(*c.parent);
    out += " {\n";
    if (c.states) out += "  " + states_clause(*c.states) + "\n";
    if (c.description) out += "  description " + quoted(*c.description) + "\n";
    if (c.default_cpt) out += "  " + cpt_clause({}, *c.default_cpt, "  ") + "\n";
    for (const auto& cc : c.constraints)
        out += "  constraint monotone self = " + name(cc.target_state) + " along class " +
               name(cc.parent_class) + " " + to_string(cc.direction) + "\n";
    out += "}";
    return out;
}

std::string template_decl(const TemplateDecl& t) {
    std::string out = "template " + name(t.name) + "(";
    for (std::size_t i = 0; i < t.params.size(); ++i) {
        if (i) out += ", ";
        out += name(t.params[i].name) + " : " +
               (t.params[i].kind == TemplateParam::Kind::Ident ? "ident" : "states");
    }
    out += ") { " + t.body + " }";
    return out;
}

std::string input_decl(const InputDecl& i) {
    std::string out = "input " + name(i.name);
    if (i.states) out += " " + states_clause(*i.states);
    return out;
}

std::string var_decl(const VarDecl& v, const std::string& indent) {
    std::string out = "var " + name(v.name);
    if (v.class_ref) out += " class " + name(*v.class_ref);
    if (v.states) out += " " + states_clause(*v.states);
    if (!v.description.empty()) out += " description " + quoted(v.description);
    if (v.cpt) out += " " + cpt_clause(v.parents, *v.cpt, indent);
    return out;
}

std::string fragment_decl(const FragmentDecl& f) {
    std::string out = f.is_stub ? "stub fragment " : "fragment ";
    out += name(f.name) + " {\n";
    if (!f.description.empty()) out += "  description " + quoted(f.description) + "\n";

    std::vector<const InputDecl*> ins = f.inputs();
    std::sort(ins.begin(), ins.end(), [](const auto* a, const auto* b) { return a->name < b->name; });
    for (const auto* in : ins) {
        append_comments(out, in->comments, "  ");
        out += "  " + input_decl(*in) + "\n";
    }
    std::vector<const VarDecl*> vars = f.vars();
    std::sort(vars.begin(), vars.end(), [](const auto* a, const auto* b) { return a->name < b->name; });
    for (const auto* v : vars) {
        append_comments(out, v->comments, "  ");
        out += "  " + var_decl(*v, "  ") + "\n";
    }
    out += "}";
    return out;
}

std::string constraint_decl(const Constraint& c) {
    if (const auto* m = std::get_if<MonotoneConstraint>(&c))
        return "constraint monotone " + name(m->child) + " = " + name(m->target_state) + " along " +
               name(m->parent) + " " + to_string(m->direction);
    const auto& iq = std::get<InequalityConstraint>(c);
    auto config = [](const Evidence& e) {
        std::string out = "(";
        bool first = true;
        for (const auto& [k, v] : e) {
            if (!first) out += ", ";
            first = false;
            out += name(k) + " = " + name(v);
        }
        return out + ")";
    };
    return "constraint inequality " + name(iq.child) + " = " + name(iq.target_state) + " : " +
           config(iq.config_a) + " " + to_string(iq.relation) + " " + config(iq.config_b);
}

std::string scenario_decl(const ScenarioDecl& s) {
    std::string out = "scenario " + name(s.name) + " {\n";
    if (!s.description.empty()) out += "  description " + quoted(s.description) + "\n";
    if (!s.focus.empty()) {
        out += "  focus ";
        for (std::size_t i = 0; i < s.focus.size(); ++i) {
            if (i) out += ", ";
            out += name(s.focus[i]);
        }
        out += "\n";
    }
    for (const auto& ev : s.evidence) {
        out += "  evidence " + name(ev.variable);
        if (!ev.allowed.empty()) {
            auto sorted = ev.allowed;
            std::sort(sorted.begin(), sorted.end());
            out += " in " + label_set(sorted);
        }
        out += "\n";
    }
    if (s.generation.exhaustive) {
        out += "  generate exhaustive\n";
    } else {
        out += "  generate sampled " + std::to_string(s.generation.samples) + " seed " +
               std::to_string(s.generation.seed);
        if (s.generation.outside) out += " outside";
        out += "\n";
    }
    out += "}";
    return out;
}

std::string composition_block(const CompositionSpec& m) {
    std::string out = "model {\n";
    auto use = m.use;
    std::sort(use.begin(), use.end());
    for (const auto& u : use) out += "  use " + name(u) + "\n";

    std::vector<std::string> inst;
    for (const auto& d : m.instantiate) {
        std::string line = "  instantiate " + name(d.template_name) + " with ";
        auto args = d.args;
        std::sort(args.begin(), args.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) line += ", ";
            line += name(args[i].first) + " = ";
            if (const auto* s = std::get_if<std::string>(&args[i].second))
                line += name(*s);
            else
                line += label_set(std::get<std::vector<std::string>>(args[i].second));
        }
        inst.push_back(line + "\n");
    }
    std::sort(inst.begin(), inst.end());
    for (const auto& l : inst) out += l;

    std::vector<std::string> binds;
    for (const auto& b : m.binds)
        binds.push_back("  bind " + name(b.from_fragment) + "." + name(b.from_input) + " -> " +
                        name(b.to_fragment) + "." + name(b.to_resident) + "\n");
    std::sort(binds.begin(), binds.end());
    for (const auto& l : binds) out += l;

    std::vector<std::string> exo;
    for (const auto& e : m.exogenous)
        exo.push_back("  exogenous " + name(e.variable) + " prior " + prob_vector(e.prior) + "\n");
    std::sort(exo.begin(), exo.end());
    for (const auto& l : exo) out += l;

    out += "}";
    return out;
}

} // namespace render

std::string serialize_kb(const KnowledgeBase& kb) {
    using namespace render;
    std::string out;
    auto emit = [&](const std::vector<std::string>& comments, const std::string& text) {
        if (!out.empty()) out += "\n";
        for (const auto& c : comments) out += "# " + c + "\n";
        out += text + "\n";
    };

    auto defines = kb.definitions;
    std::sort(defines.begin(), defines.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& d : defines) emit(d.comments, define_decl(d));

    auto classes = kb.classes;
    std::sort(classes.begin(), classes.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& c : classes) emit(c.comments, class_decl(c));

    auto templates = kb.templates;
    std::sort(templates.begin(), templates.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& t : templates) emit(t.comments, template_decl(t));

    auto fragments = kb.fragments;
    std::sort(fragments.begin(), fragments.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& f : fragments) emit(f.comments, fragment_decl(f));

    std::vector<std::pair<std::string, const TopConstraint*>> constraints;
    for (const auto& c : kb.constraints) constraints.emplace_back(constraint_decl(c.constraint), &c);
    std::sort(constraints.begin(), constraints.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [text, c] : constraints) emit(c->comments, text);

    auto scenarios = kb.scenarios;
    std::sort(scenarios.begin(), scenarios.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& s : scenarios) emit(s.comments, scenario_decl(s));

    if (kb.composition.present) emit(kb.composition.comments, composition_block(kb.composition));

    return out;
}

} // namespace bnforge
