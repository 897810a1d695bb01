#include "bnforge/classes.hpp"

#include <set>

#include "bnforge/errors.hpp"

namespace bnforge {

namespace {

const ClassDecl* find(const std::vector<ClassDecl>& hierarchy, const std::string& name) {
    for (const auto& c : hierarchy)
        if (c.name == name) return &c;
    return nullptr;
}

} // namespace

ResolvedFeatures resolve_class(const std::string& class_name,
                               const std::vector<ClassDecl>& hierarchy) {
    ResolvedFeatures out;
    std::set<std::string> visited;
    const ClassDecl* c = find(hierarchy, class_name);
    if (!c) throw RefError("unknown class '" + class_name + "'");
    while (c) {
        if (!visited.insert(c->name).second)
            throw RefError("cycle in class hierarchy at '" + c->name + "'");
        if (!out.states && c->states) {
            out.states = c->states;
            out.states_from = c->name;
        }
        if (!out.default_cpt && c->default_cpt) {
            out.default_cpt = c->default_cpt;
            out.default_cpt_from = c->name;
        }
        if (!out.description && c->description) {
            out.description = c->description;
            out.description_from = c->name;
        }
        if (out.constraints.empty() && !c->constraints.empty()) {
            out.constraints = c->constraints;
            out.constraints_from = c->name;
        }
        if (!c->parent) break;
        const ClassDecl* next = find(hierarchy, *c->parent);
        if (!next) throw RefError("class '" + c->name + "' extends unknown class '" + *c->parent + "'");
        c = next;
    }
    return out;
}

bool class_is_a(const std::string& cls, const std::string& ancestor,
                const std::vector<ClassDecl>& hierarchy) {
    std::set<std::string> visited;
    const ClassDecl* c = find(hierarchy, cls);
    while (c) {
        if (!visited.insert(c->name).second) return false;
        if (c->name == ancestor) return true;
        if (!c->parent) return false;
        c = find(hierarchy, *c->parent);
    }
    return false;
}

} // namespace bnforge
