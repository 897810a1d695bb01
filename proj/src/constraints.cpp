#include "bnforge/constraints.hpp"

#include <algorithm>

#include "bnforge/errors.hpp"

namespace bnforge {

namespace {

struct ChildView {
    const Variable* child;
    std::vector<std::string> parent_names;
    std::vector<StateSpace> parent_spaces;
    const CptTable* table;
};

ChildView resolve_child(const CompiledNetwork& net, const std::string& name) {
    const Variable* child = net.find(name);
    if (!child) throw RefError("constraint references unknown variable '" + name + "'");
    ChildView view{child, {}, {}, nullptr};
    auto pit = net.parents.find(name);
    if (pit != net.parents.end()) view.parent_names = pit->second;
    for (const auto& pname : view.parent_names) {
        const Variable* p = net.find(pname);
        if (!p) throw RefError("constraint: unknown parent '" + pname + "' of '" + name + "'");
        view.parent_spaces.push_back(p->space);
    }
    auto cit = net.cpts.find(name);
    if (cit == net.cpts.end()) throw RefError("constraint: no CPT for '" + name + "'");
    view.table = &cit->second;
    return view;
}

std::string config_text(const std::vector<std::string>& names, const std::vector<std::size_t>& idx,
                        const std::vector<StateSpace>& spaces) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) s += ", ";
        s += names[i] + "=" + spaces[i].states[idx[i]];
    }
    return s;
}

void check_monotone(const CompiledNetwork& net, const MonotoneConstraint& c, std::size_t index,
                    ConstraintReport& report) {
    ChildView view = resolve_child(net, c.child);
    auto target = view.child->space.index_of(c.target_state);
    if (!target)
        throw RefError("constraint: '" + c.target_state + "' is not a state of '" + c.child + "'");
    auto pit = std::find(view.parent_names.begin(), view.parent_names.end(), c.parent);
    if (pit == view.parent_names.end())
        throw RefError("constraint: '" + c.parent + "' is not a parent of '" + c.child + "'");
    std::size_t axis = static_cast<std::size_t>(pit - view.parent_names.begin());
    const StateSpace& pspace = view.parent_spaces[axis];
    if (!pspace.ordered)
        throw RefError("monotone constraint requires ordered state space for parent '" + c.parent + "'");

    // iterate configurations of the remaining parents
    std::vector<StateSpace> rest_spaces;
    std::vector<std::string> rest_names;
    for (std::size_t i = 0; i < view.parent_spaces.size(); ++i) {
        if (i == axis) continue;
        rest_spaces.push_back(view.parent_spaces[i]);
        rest_names.push_back(view.parent_names[i]);
    }
    std::size_t rest_count = config_count(rest_spaces);
    for (std::size_t rc = 0; rc < rest_count; ++rc) {
        auto rest_idx = decode_config(rc, rest_spaces);
        std::vector<std::size_t> full(view.parent_spaces.size());
        auto value_at = [&](std::size_t s) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < full.size(); ++i)
                full[i] = (i == axis) ? s : rest_idx[k++];
            return (*view.table)[encode_config(full, view.parent_spaces)][*target];
        };
        for (std::size_t s = 0; s + 1 < pspace.size(); ++s) {
            double a = value_at(s);
            double b = value_at(s + 1);
            bool bad = (c.direction == Direction::NonIncreasing) ? (b > a) : (b < a);
            if (!bad) continue;
            std::string rest = config_text(rest_names, rest_idx, rest_spaces);
            ConstraintViolation v;
            v.constraint_index = index;
            v.child = c.child;
            v.value_a = a;
            v.value_b = b;
            v.message = "P(" + c.child + "=" + c.target_state + ") not " +
                        (c.direction == Direction::NonIncreasing ? "non-increasing" : "non-decreasing") +
                        " along " + c.parent + ": (" + pspace.states[s] + ", " + pspace.states[s + 1] +
                        ")" + (rest.empty() ? "" : " given " + rest);
            report.violations.push_back(std::move(v));
        }
    }
}

std::size_t row_of_config(const ChildView& view, const Evidence& config, const char* which) {
    std::vector<std::size_t> idx(view.parent_names.size());
    for (std::size_t i = 0; i < view.parent_names.size(); ++i) {
        auto it = config.find(view.parent_names[i]);
        if (it == config.end())
            throw RefError(std::string("inequality constraint: configuration ") + which +
                           " does not assign parent '" + view.parent_names[i] + "'");
        auto pos = view.parent_spaces[i].index_of(it->second);
        if (!pos)
            throw RefError(std::string("inequality constraint: '") + it->second +
                           "' is not a state of '" + view.parent_names[i] + "'");
        idx[i] = *pos;
    }
    for (const auto& [name, state] : config)
        if (std::find(view.parent_names.begin(), view.parent_names.end(), name) ==
            view.parent_names.end())
            throw RefError("inequality constraint: '" + name + "' is not a parent of the child");
    return encode_config(idx, view.parent_spaces);
}

void check_inequality(const CompiledNetwork& net, const InequalityConstraint& c, std::size_t index,
                      ConstraintReport& report) {
    ChildView view = resolve_child(net, c.child);
    auto target = view.child->space.index_of(c.target_state);
    if (!target)
        throw RefError("constraint: '" + c.target_state + "' is not a state of '" + c.child + "'");
    double a = (*view.table)[row_of_config(view, c.config_a, "A")][*target];
    double b = (*view.table)[row_of_config(view, c.config_b, "B")][*target];
    bool ok = (c.relation == Relation::Less) ? (a < b) : (a <= b);
    if (ok) return;
    auto etext = [](const Evidence& e) {
        std::string s;
        for (const auto& [k, v] : e) {
            if (!s.empty()) s += ", ";
            s += k + "=" + v;
        }
        return s;
    };
    ConstraintViolation v;
    v.constraint_index = index;
    v.child = c.child;
    v.value_a = a;
    v.value_b = b;
    v.message = "P(" + c.child + "=" + c.target_state + " | " + etext(c.config_a) + ") " +
                to_string(c.relation) + " P(... | " + etext(c.config_b) + ") violated";
    report.violations.push_back(std::move(v));
}

} // namespace

ConstraintReport check_constraints(const CompiledNetwork& net,
                                   const std::vector<Constraint>& constraints) {
    ConstraintReport report;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (const auto* m = std::get_if<MonotoneConstraint>(&constraints[i]))
            check_monotone(net, *m, i, report);
        else
            check_inequality(net, std::get<InequalityConstraint>(constraints[i]), i, report);
    }
    return report;
}

} // namespace bnforge
