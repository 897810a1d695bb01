#include "bnforge/cpt.hpp"

#include <algorithm>
#include <numeric>

#include "bnforge/errors.hpp"

namespace bnforge {

CptForm form_of(const CptSpec& spec) {
    switch (spec.index()) {
        case 0: return CptForm::Explicit;
        case 1: return CptForm::Partition;
        case 2: return CptForm::NoisyOr;
        default: return CptForm::Deterministic;
    }
}

const char* to_string(CptForm f) {
    switch (f) {
        case CptForm::Explicit: return "explicit";
        case CptForm::Partition: return "partition";
        case CptForm::NoisyOr: return "noisyor";
        case CptForm::Deterministic: return "deterministic";
    }
    return "?";
}

std::size_t config_count(const std::vector<StateSpace>& parents) {
    std::size_t n = 1;
    for (const auto& p : parents) n *= p.size();
    return n;
}

std::vector<std::size_t> decode_config(std::size_t row, const std::vector<StateSpace>& parents) {
    std::vector<std::size_t> idx(parents.size(), 0);
    for (std::size_t i = parents.size(); i-- > 0;) {
        idx[i] = row % parents[i].size();
        row /= parents[i].size();
    }
    return idx;
}

std::size_t encode_config(const std::vector<std::size_t>& idx, const std::vector<StateSpace>& parents) {
    std::size_t row = 0;
    for (std::size_t i = 0; i < parents.size(); ++i)
        row = row * parents[i].size() + idx[i];
    return row;
}

namespace {

std::string config_label(const std::vector<std::size_t>& idx, const std::vector<StateSpace>& parents) {
    std::string s = "(";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += ", ";
        s += parents[i].states[idx[i]];
    }
    return s + ")";
}

bool pattern_matches(const ConfigPattern& pat, const std::vector<std::size_t>& idx,
                     const std::vector<StateSpace>& parents) {
    for (std::size_t i = 0; i < pat.size(); ++i) {
        if (pat[i].wildcard) continue;
        const std::string& label = parents[i].states[idx[i]];
        if (std::find(pat[i].states.begin(), pat[i].states.end(), label) == pat[i].states.end())
            return false;
    }
    return true;
}

void check_pattern_shape(const ConfigPattern& pat, const std::vector<StateSpace>& parents,
                         const char* what) {
    if (pat.size() != parents.size())
        throw ExpandError(std::string(what) + ": pattern arity " + std::to_string(pat.size()) +
                          " does not match parent count " + std::to_string(parents.size()));
    for (std::size_t i = 0; i < pat.size(); ++i) {
        if (pat[i].wildcard) continue;
        for (const auto& s : pat[i].states)
            if (!parents[i].index_of(s))
                throw ExpandError(std::string(what) + ": unknown state '" + s + "' for parent " +
                                  std::to_string(i + 1));
    }
}

CptTable expand_explicit(const ExplicitCpt& cpt, const StateSpace& child,
                         const std::vector<StateSpace>& parents) {
    const std::size_t n = config_count(parents);
    CptTable table(n);
    std::vector<bool> seen(n, false);
    for (const auto& row : cpt.rows) {
        if (row.config.size() != parents.size())
            throw ExpandError("explicit row config arity " + std::to_string(row.config.size()) +
                              " does not match parent count " + std::to_string(parents.size()));
        std::vector<std::size_t> idx(parents.size());
        for (std::size_t i = 0; i < parents.size(); ++i) {
            auto pos = parents[i].index_of(row.config[i]);
            if (!pos)
                throw ExpandError("explicit row: unknown state '" + row.config[i] + "' for parent " +
                                  std::to_string(i + 1));
            idx[i] = *pos;
        }
        if (row.probs.size() != child.size())
            throw ExpandError("explicit row has " + std::to_string(row.probs.size()) +
                              " entries; child has " + std::to_string(child.size()) + " states");
        std::size_t r = encode_config(idx, parents);
        if (seen[r])
            throw ExpandError("duplicate explicit row for configuration " + config_label(idx, parents));
        seen[r] = true;
        table[r] = row.probs;
    }
    for (std::size_t r = 0; r < n; ++r)
        if (!seen[r])
            throw ExpandError("missing explicit row for configuration " +
                              config_label(decode_config(r, parents), parents));
    return table;
}

CptTable expand_partition(const PartitionCpt& cpt, const StateSpace& child,
                          const std::vector<StateSpace>& parents) {
    const std::size_t n = config_count(parents);
    for (const auto& el : cpt.elements) {
        if (el.patterns.empty()) throw ExpandError("partition element has no patterns");
        for (const auto& pat : el.patterns) check_pattern_shape(pat, parents, "partition");
        if (el.dist.size() != child.size())
            throw ExpandError("partition element distribution has " + std::to_string(el.dist.size()) +
                              " entries; child has " + std::to_string(child.size()) + " states");
    }
    CptTable table(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto idx = decode_config(r, parents);
        const PartitionCpt::Element* owner = nullptr;
        for (const auto& el : cpt.elements) {
            bool hit = false;
            for (const auto& pat : el.patterns)
                if (pattern_matches(pat, idx, parents)) { hit = true; break; }
            if (!hit) continue;
            if (owner)
                throw ExpandError("overlapping partition: configuration " + config_label(idx, parents) +
                                  " matches more than one element");
            owner = &el;
        }
        if (!owner)
            throw ExpandError("non-covering partition: configuration " + config_label(idx, parents) +
                              " matches no element");
        table[r] = owner->dist;
    }
    return table;
}

CptTable expand_noisy_or(const NoisyOrCpt& cpt, const StateSpace& child,
                         const std::vector<StateSpace>& parents) {
    if (child.size() != 2)
        throw ExpandError("noisy-OR child must be boolean (2 states), has " +
                          std::to_string(child.size()));
    for (const auto& p : parents)
        if (p.size() != 2)
            throw ExpandError("noisy-OR parents must be boolean (2 states)");
    if (cpt.link.size() != parents.size())
        throw ExpandError("noisy-OR has " + std::to_string(cpt.link.size()) + " link probabilities for " +
                          std::to_string(parents.size()) + " parents");
    if (cpt.leak < 0.0 || cpt.leak > 1.0)
        throw ExpandError("noisy-OR leak outside [0,1]");
    for (double p : cpt.link)
        if (p < 0.0 || p > 1.0) throw ExpandError("noisy-OR link probability outside [0,1]");

    const std::size_t n = config_count(parents);
    CptTable table(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto idx = decode_config(r, parents);
        double miss = 1.0 - cpt.leak;
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] == 0) miss *= 1.0 - cpt.link[i]; // parent in its "true" state
        table[r] = {1.0 - miss, miss};
    }
    return table;
}

CptTable expand_deterministic(const DeterministicCpt& cpt, const StateSpace& child,
                              const std::vector<StateSpace>& parents) {
    const std::size_t n = config_count(parents);
    for (const auto& rule : cpt.rules) {
        check_pattern_shape(rule.pattern, parents, "deterministic");
        if (!child.index_of(rule.output))
            throw ExpandError("deterministic rule output '" + rule.output + "' is not a child state");
    }
    CptTable table(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto idx = decode_config(r, parents);
        const DeterministicCpt::Rule* owner = nullptr;
        for (const auto& rule : cpt.rules) {
            if (!pattern_matches(rule.pattern, idx, parents)) continue;
            if (owner)
                throw ExpandError("overlapping deterministic rules: configuration " +
                                  config_label(idx, parents) + " matches more than one rule");
            owner = &rule;
        }
        if (!owner)
            throw ExpandError("deterministic table does not cover configuration " +
                              config_label(idx, parents));
        std::vector<double> row(child.size(), 0.0);
        row[*child.index_of(owner->output)] = 1.0;
        table[r] = std::move(row);
    }
    return table;
}

} // namespace

CptTable expand_cpt(const CptSpec& spec, const StateSpace& child,
                    const std::vector<StateSpace>& parents) {
    return std::visit(
        [&](const auto& s) -> CptTable {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExplicitCpt>) return expand_explicit(s, child, parents);
            else if constexpr (std::is_same_v<T, PartitionCpt>) return expand_partition(s, child, parents);
            else if constexpr (std::is_same_v<T, NoisyOrCpt>) return expand_noisy_or(s, child, parents);
            else return expand_deterministic(s, child, parents);
        },
        spec);
}

} // namespace bnforge
