#include "bnforge/scenario.hpp"

#include <algorithm>
#include <set>

#include "bnforge/conflict.hpp"
#include "bnforge/errors.hpp"
#include "bnforge/rng.hpp"

namespace bnforge {

namespace {

constexpr std::uint64_t kCaseSpaceLimit = 1000000000000000ULL; // 1e15

struct ResolvedScenario {
    std::vector<const Variable*> vars;            // evidence variables, scenario order
    std::vector<std::vector<std::size_t>> allowed; // state indices, space order
};

ResolvedScenario resolve(const ScenarioDecl& scenario, const CompiledNetwork& net) {
    ResolvedScenario out;
    for (const auto& f : scenario.focus)
        if (!net.find(f))
            throw RefError("scenario '" + scenario.name + "': unknown focus variable '" + f + "'");
    for (const auto& ev : scenario.evidence) {
        const Variable* v = net.find(ev.variable);
        if (!v)
            throw RefError("scenario '" + scenario.name + "': unknown evidence variable '" +
                           ev.variable + "'");
        std::vector<std::size_t> idx;
        if (ev.allowed.empty()) {
            for (std::size_t i = 0; i < v->space.size(); ++i) idx.push_back(i);
        } else {
            std::set<std::size_t> set;
            for (const auto& label : ev.allowed) {
                auto pos = v->space.index_of(label);
                if (!pos)
                    throw RefError("scenario '" + scenario.name + "': '" + label +
                                   "' is not a state of '" + ev.variable + "'");
                set.insert(*pos);
            }
            idx.assign(set.begin(), set.end()); // canonical: state-space order
        }
        if (idx.empty()) throw Error("scenario '" + scenario.name + "': empty allowed-state set");
        out.vars.push_back(v);
        out.allowed.push_back(std::move(idx));
    }
    return out;
}

std::uint64_t checked_product(const std::vector<std::uint64_t>& sizes) {
    std::uint64_t p = 1;
    for (std::uint64_t s : sizes) {
        if (s != 0 && p > kCaseSpaceLimit / s)
            throw Error("scenario case space exceeds " + std::to_string(kCaseSpaceLimit));
        p *= s;
    }
    return p;
}

TestCase case_from_indices(const ResolvedScenario& rs, const std::vector<std::size_t>& idx) {
    TestCase c;
    for (std::size_t i = 0; i < rs.vars.size(); ++i)
        c.assignments[rs.vars[i]->name] = rs.vars[i]->space.states[idx[i]];
    return c;
}

// u-th tuple (lex order, first variable most significant) of the allowed product
std::vector<std::size_t> unrank_allowed(const ResolvedScenario& rs, std::uint64_t u) {
    std::vector<std::size_t> idx(rs.vars.size());
    for (std::size_t i = rs.vars.size(); i-- > 0;) {
        std::uint64_t radix = rs.allowed[i].size();
        idx[i] = rs.allowed[i][u % radix];
        u /= radix;
    }
    return idx;
}

// u-th tuple (lex order over the full product) that is NOT in the allowed product
std::vector<std::size_t> unrank_outside(const ResolvedScenario& rs, std::uint64_t u) {
    const std::size_t k = rs.vars.size();
    std::vector<std::uint64_t> suffix_full(k + 1, 1), suffix_allowed(k + 1, 1);
    for (std::size_t i = k; i-- > 0;) {
        suffix_full[i] = suffix_full[i + 1] * rs.vars[i]->space.size();
        suffix_allowed[i] = suffix_allowed[i + 1] * rs.allowed[i].size();
    }
    std::vector<std::size_t> idx(k);
    bool prefix_allowed = true;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t s = 0; s < rs.vars[i]->space.size(); ++s) {
            bool s_allowed = std::binary_search(rs.allowed[i].begin(), rs.allowed[i].end(), s);
            std::uint64_t outside_here =
                suffix_full[i + 1] - ((prefix_allowed && s_allowed) ? suffix_allowed[i + 1] : 0);
            if (u < outside_here) {
                idx[i] = s;
                prefix_allowed = prefix_allowed && s_allowed;
                break;
            }
            u -= outside_here;
        }
    }
    return idx;
}

} // namespace

std::vector<TestCase> generate_cases(const ScenarioDecl& scenario, const CompiledNetwork& net) {
    ResolvedScenario rs = resolve(scenario, net);

    std::vector<std::uint64_t> allowed_sizes, full_sizes;
    for (std::size_t i = 0; i < rs.vars.size(); ++i) {
        allowed_sizes.push_back(rs.allowed[i].size());
        full_sizes.push_back(rs.vars[i]->space.size());
    }
    std::uint64_t allowed_total = checked_product(allowed_sizes);
    std::vector<TestCase> cases;

    if (scenario.generation.exhaustive) {
        for (std::uint64_t u = 0; u < allowed_total; ++u)
            cases.push_back(case_from_indices(rs, unrank_allowed(rs, u)));
        return cases;
    }

    std::uint64_t space;
    if (scenario.generation.outside) {
        std::uint64_t full_total = checked_product(full_sizes);
        space = full_total - allowed_total;
        if (space == 0)
            throw Error("scenario '" + scenario.name +
                        "': no cases outside the allowed sets (allowed sets cover every state)");
    } else {
        space = allowed_total;
    }

    std::set<std::uint64_t> ranks;
    if (scenario.generation.samples >= space) {
        for (std::uint64_t u = 0; u < space; ++u) ranks.insert(u);
    } else {
        Rng rng(scenario.generation.seed);
        while (ranks.size() < scenario.generation.samples) ranks.insert(rng.below(space));
    }
    for (std::uint64_t u : ranks)
        cases.push_back(case_from_indices(
            rs, scenario.generation.outside ? unrank_outside(rs, u) : unrank_allowed(rs, u)));
    return cases;
}

double coverage(const ScenarioDecl& scenario, const CompiledNetwork& net,
                const std::vector<TestCase>& cases) {
    ResolvedScenario rs = resolve(scenario, net);
    std::vector<std::uint64_t> allowed_sizes, full_sizes;
    for (std::size_t i = 0; i < rs.vars.size(); ++i) {
        allowed_sizes.push_back(rs.allowed[i].size());
        full_sizes.push_back(rs.vars[i]->space.size());
    }
    std::uint64_t denom = checked_product(allowed_sizes);
    if (!scenario.generation.exhaustive && scenario.generation.outside)
        denom = checked_product(full_sizes) - denom;
    std::set<Evidence> distinct;
    for (const auto& c : cases) distinct.insert(c.assignments);
    return denom == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(denom);
}

RunResults run_cases(const CompiledNetwork& net, const ScenarioDecl& scenario,
                     const std::vector<TestCase>& cases) {
    resolve(scenario, net); // validates the variable references
    RunResults out;
    out.scenario = scenario.name;
    for (const auto& c : cases) {
        CaseResult r;
        r.assignments = c.assignments;
        r.evidence_probability = evidence_probability(net, c.assignments);
        if (!(r.evidence_probability > 0.0)) {
            r.impossible = true;
            out.cases.push_back(std::move(r));
            continue;
        }
        r.focus = posterior(net, c.assignments, scenario.focus);
        r.conflict_bits = conflict(net, c.assignments).value_bits;
        out.cases.push_back(std::move(r));
    }
    return out;
}

} // namespace bnforge
