#include "bnforge/importance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bnforge/errors.hpp"
#include "bnforge/rng.hpp"

namespace bnforge {

namespace {

void check_args(const CompiledNetwork& net, const std::string& focus,
                const std::vector<std::string>& evidence_vars, const Evidence& base) {
    if (!net.find(focus)) throw RefError("unknown focus variable '" + focus + "'");
    if (base.count(focus)) throw Error("focus variable '" + focus + "' is assigned in the base evidence");
    std::set<std::string> seen;
    for (const auto& e : evidence_vars) {
        if (!net.find(e)) throw RefError("unknown evidence variable '" + e + "'");
        if (e == focus) throw Error("focus variable '" + focus + "' is also an evidence variable");
        if (base.count(e)) throw Error("evidence variable '" + e + "' is assigned in the base evidence");
        if (!seen.insert(e).second) throw Error("evidence variable '" + e + "' listed twice");
    }
    for (const auto& [name, state] : base) {
        const Variable* v = net.find(name);
        if (!v) throw RefError("unknown base variable '" + name + "'");
        if (!v->space.index_of(state))
            throw RefError("'" + state + "' is not a state of '" + name + "'");
    }
}

// expected squared change of the focus posterior when the compound variable
// set `vars` is observed, base held fixed
double compound_importance(const CompiledNetwork& net, const std::string& focus,
                           const std::vector<std::string>& vars, const Evidence& base,
                           const std::vector<double>& focus_base) {
    Factor joint = joint_posterior(net, base, vars);
    // joint.vars are network indices ascending; map back to names/spaces
    std::vector<const Variable*> jvars;
    for (int idx : joint.vars) jvars.push_back(&net.variables[static_cast<std::size_t>(idx)]);

    double total = 0.0;
    std::vector<std::size_t> cfg(jvars.size(), 0);
    for (std::size_t flat = 0; flat < joint.values.size(); ++flat) {
        double pe = joint.values[flat];
        if (pe > 0.0) {
            Evidence with = base;
            for (std::size_t i = 0; i < jvars.size(); ++i)
                with[jvars[i]->name] = jvars[i]->space.states[cfg[i]];
            auto post = posterior(net, with, {focus});
            const auto& pf = post.at(focus).probabilities;
            double sq = 0.0;
            for (std::size_t s = 0; s < pf.size(); ++s) {
                double d = pf[s] - focus_base[s];
                sq += d * d;
            }
            total += pe * sq;
        }
        for (std::size_t d = jvars.size(); d-- > 0;) {
            if (++cfg[d] < jvars[d]->space.size()) break;
            cfg[d] = 0;
        }
    }
    return total < kImportanceZero ? 0.0 : total;
}

} // namespace

ImportanceResult importance(const CompiledNetwork& net, const std::string& focus,
                            const std::vector<std::string>& evidence_vars, const Evidence& base) {
    check_args(net, focus, evidence_vars, base);
    std::vector<double> focus_base = posterior(net, base, {focus}).at(focus).probabilities;

    ImportanceResult result;
    result.focus = focus;
    result.base = base;
    for (const auto& e : evidence_vars) {
        ImportanceEntry entry;
        entry.variable = e;
        entry.importance = compound_importance(net, focus, {e}, base, focus_base);
        result.entries.push_back(std::move(entry));
    }

    std::sort(result.entries.begin(), result.entries.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.variable < b.variable;
    });
    double max_i = result.entries.empty() ? 0.0 : result.entries.front().importance;
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        auto& entry = result.entries[i];
        entry.rank = static_cast<int>(i) + 1;
        entry.score = max_i > 0.0 ? 100.0 * entry.importance / max_i : 0.0;
    }
    return result;
}

std::vector<SynergyEntry> synergy_sample(const CompiledNetwork& net, const std::string& focus,
                                         const std::vector<std::string>& evidence_vars,
                                         std::size_t k, std::size_t n, std::uint64_t seed) {
    check_args(net, focus, evidence_vars, {});
    const std::size_t m = evidence_vars.size();
    if (k < 2 || k > m) throw Error("combination size k out of range [2, " + std::to_string(m) + "]");
    if (n < 1) throw Error("sample count must be at least 1");

    // C(m,k), capped to avoid overflow
    auto choose_capped = [](std::size_t m_, std::size_t k_) -> std::uint64_t {
        constexpr std::uint64_t cap = 1ULL << 62;
        std::uint64_t c = 1;
        for (std::size_t i = 0; i < k_; ++i) {
            if (c > cap / (m_ - i)) return cap;
            c = c * (m_ - i) / (i + 1);
        }
        return c;
    };
    std::uint64_t total = choose_capped(m, k);

    std::set<std::vector<std::size_t>> picked;
    if (n >= total) {
        // all combinations, lexicographic
        std::vector<std::size_t> comb(k);
        for (std::size_t i = 0; i < k; ++i) comb[i] = i;
        while (true) {
            picked.insert(comb);
            std::size_t i = k;
            while (i-- > 0) {
                if (comb[i] != i + m - k) {
                    ++comb[i];
                    for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                    break;
                }
                if (i == 0) goto done;
            }
        }
    done:;
    } else {
        Rng rng(seed);
        while (picked.size() < n) {
            // partial Fisher-Yates over indices 0..m-1
            std::vector<std::size_t> pool(m);
            for (std::size_t i = 0; i < m; ++i) pool[i] = i;
            std::vector<std::size_t> comb;
            for (std::size_t i = 0; i < k; ++i) {
                std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
                std::swap(pool[i], pool[j]);
                comb.push_back(pool[i]);
            }
            std::sort(comb.begin(), comb.end());
            picked.insert(std::move(comb));
        }
    }

    std::vector<double> focus_base = posterior(net, {}, {focus}).at(focus).probabilities;
    std::vector<SynergyEntry> out;
    for (const auto& comb : picked) {
        SynergyEntry entry;
        double singles = 0.0;
        for (std::size_t idx : comb) {
            entry.combination.push_back(evidence_vars[idx]);
            singles += compound_importance(net, focus, {evidence_vars[idx]}, {}, focus_base);
        }
        std::sort(entry.combination.begin(), entry.combination.end());
        entry.joint_importance = compound_importance(net, focus, entry.combination, {}, focus_base);
        entry.synergy = entry.joint_importance - singles;
        out.push_back(std::move(entry));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.joint_importance != b.joint_importance) return a.joint_importance > b.joint_importance;
        return a.combination < b.combination;
    });
    return out;
}

std::string render_importance_report(const ImportanceResult& result) {
    std::string out = "Importance Analysis for \"" + result.focus + "\"\n";
    out += "Current Observations:";
    if (result.base.empty()) {
        out += " (none)";
    } else {
        bool first = true;
        for (const auto& [var, state] : result.base) {
            out += first ? " " : "; ";
            first = false;
            out += var + " = " + state;
        }
    }
    out += "\nIMPORTANCE   ##  NAME\n";
    for (const auto& entry : result.entries) {
        int stars = entry.score == 0.0 ? 0 : static_cast<int>(std::ceil(5.0 * entry.score / 100.0));
        std::string bar(static_cast<std::size_t>(stars), '*');
        bar.resize(5, ' ');
        std::string score_text;
        if (entry.score > 0.0 && entry.score < 1.0)
            score_text = "0+";
        else
            score_text = std::to_string(static_cast<long>(std::lround(entry.score)));
        while (score_text.size() < 5) score_text.insert(score_text.begin(), ' ');
        out += bar + " " + score_text + "  " + entry.variable + "\n";
    }
    return out;
}

} // namespace bnforge
