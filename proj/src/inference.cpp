#include "bnforge/inference.hpp"

#include <algorithm>
#include <set>

#include "bnforge/errors.hpp"

namespace bnforge {

IndexedNetwork::IndexedNetwork(const CompiledNetwork& n) : net(&n) {
    for (std::size_t i = 0; i < n.variables.size(); ++i)
        index.emplace(n.variables[i].name, static_cast<int>(i));

    parent_idx.resize(n.variables.size());
    cpt_factors.reserve(n.variables.size());
    for (std::size_t v = 0; v < n.variables.size(); ++v) {
        const Variable& var = n.variables[v];
        const auto& pnames = n.parents.at(var.name);
        std::vector<StateSpace> pspaces;
        for (const auto& p : pnames) {
            parent_idx[v].push_back(require(p));
            pspaces.push_back(n.variables[static_cast<std::size_t>(parent_idx[v].back())].space);
        }
        const CptTable& table = n.cpts.at(var.name);

        Factor f;
        std::vector<int> scope = parent_idx[v];
        scope.push_back(static_cast<int>(v));
        std::sort(scope.begin(), scope.end());
        f.vars = scope;
        std::size_t total = 1;
        for (int s : scope) {
            f.card.push_back(static_cast<int>(n.variables[static_cast<std::size_t>(s)].space.size()));
            total *= n.variables[static_cast<std::size_t>(s)].space.size();
        }
        f.values.resize(total);

        std::vector<std::size_t> strides(scope.size(), 1);
        for (std::size_t i = scope.size(); i-- > 1;)
            strides[i - 1] = strides[i] * static_cast<std::size_t>(f.card[i]);
        auto pos_of = [&](int var_id) {
            return static_cast<std::size_t>(
                std::lower_bound(scope.begin(), scope.end(), var_id) - scope.begin());
        };
        std::size_t child_pos = pos_of(static_cast<int>(v));

        for (std::size_t r = 0; r < table.size(); ++r) {
            auto cfg = decode_config(r, pspaces);
            std::size_t base = 0;
            for (std::size_t j = 0; j < pnames.size(); ++j)
                base += strides[pos_of(parent_idx[v][j])] * cfg[j];
            for (std::size_t s = 0; s < table[r].size(); ++s)
                f.values[base + strides[child_pos] * s] = table[r][s];
        }
        cpt_factors.push_back(std::move(f));
    }
}

int IndexedNetwork::require(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw RefError("unknown variable '" + name + "'");
    return it->second;
}

namespace {

// evidence as (variable index, state index), validated
std::vector<std::pair<int, int>> index_evidence(const IndexedNetwork& ix, const Evidence& evidence) {
    std::vector<std::pair<int, int>> out;
    for (const auto& [name, state] : evidence) {
        int v = ix.require(name);
        auto s = ix.net->variables[static_cast<std::size_t>(v)].space.index_of(state);
        if (!s)
            throw RefError("'" + state + "' is not a state of '" + name + "'");
        out.emplace_back(v, static_cast<int>(*s));
    }
    return out;
}

} // namespace

std::vector<int> min_fill_order(const IndexedNetwork& ix, const Evidence& evidence,
                                const std::vector<int>& targets) {
    const std::size_t n = ix.net->variables.size();
    std::vector<bool> skip(n, false);
    for (int t : targets) skip[static_cast<std::size_t>(t)] = true;
    for (const auto& [v, s] : index_evidence(ix, evidence)) skip[static_cast<std::size_t>(v)] = true;

    // interaction graph from the reduced factor scopes
    std::vector<std::set<int>> adj(n);
    for (const auto& f : ix.cpt_factors) {
        std::vector<int> scope;
        for (int v : f.vars)
            if (!evidence.count(ix.net->variables[static_cast<std::size_t>(v)].name)) scope.push_back(v);
        for (std::size_t i = 0; i < scope.size(); ++i)
            for (std::size_t j = i + 1; j < scope.size(); ++j) {
                adj[static_cast<std::size_t>(scope[i])].insert(scope[j]);
                adj[static_cast<std::size_t>(scope[j])].insert(scope[i]);
            }
    }

    std::vector<int> remaining;
    for (std::size_t v = 0; v < n; ++v)
        if (!skip[v]) remaining.push_back(static_cast<int>(v));

    std::vector<int> order;
    while (!remaining.empty()) {
        int best = -1;
        std::size_t best_fill = 0;
        for (int v : remaining) {
            std::vector<int> nb;
            for (int w : adj[static_cast<std::size_t>(v)])
                if (!skip[static_cast<std::size_t>(w)] &&
                    std::find(order.begin(), order.end(), w) == order.end())
                    nb.push_back(w);
            std::size_t fill = 0;
            for (std::size_t i = 0; i < nb.size(); ++i)
                for (std::size_t j = i + 1; j < nb.size(); ++j)
                    if (!adj[static_cast<std::size_t>(nb[i])].count(nb[j])) ++fill;
            if (best < 0 || fill < best_fill ||
                (fill == best_fill &&
                 ix.net->variables[static_cast<std::size_t>(v)].name <
                     ix.net->variables[static_cast<std::size_t>(best)].name)) {
                best = v;
                best_fill = fill;
            }
        }
        // connect the neighbours of the eliminated variable
        std::vector<int> nb;
        for (int w : adj[static_cast<std::size_t>(best)])
            if (!skip[static_cast<std::size_t>(w)] &&
                std::find(order.begin(), order.end(), w) == order.end())
                nb.push_back(w);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                adj[static_cast<std::size_t>(nb[i])].insert(nb[j]);
                adj[static_cast<std::size_t>(nb[j])].insert(nb[i]);
            }
        order.push_back(best);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }
    return order;
}

Factor eliminate(const IndexedNetwork& ix, const Evidence& evidence,
                 const std::vector<int>& targets, const std::vector<int>& order) {
    auto ev = index_evidence(ix, evidence);
    std::vector<Factor> pool;
    pool.reserve(ix.cpt_factors.size());
    for (const auto& f : ix.cpt_factors) {
        Factor g = f;
        for (const auto& [v, s] : ev) g = reduce(g, v, s);
        pool.push_back(std::move(g));
    }

    for (int v : order) {
        Factor prod = Factor::scalar(1.0);
        std::vector<Factor> rest;
        rest.reserve(pool.size());
        for (auto& f : pool) {
            if (f.has(v))
                prod = multiply(prod, f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(sum_out(prod, v));
        pool = std::move(rest);
    }

    Factor result = Factor::scalar(1.0);
    for (const auto& f : pool) {
        // with a query target, constant factors from disconnected components
        // would only scale the normalizer; dropping them keeps d-separated
        // marginals bit-exact
        if (!targets.empty() && f.vars.empty()) continue;
        result = multiply(result, f);
    }
    return result;
}

namespace {

Factor query_joint(const IndexedNetwork& ix, const Evidence& evidence, const std::vector<int>& targets) {
    auto order = min_fill_order(ix, evidence, targets);
    return eliminate(ix, evidence, targets, order);
}

Marginal marginal_from_factor(const IndexedNetwork& ix, const Factor& f, int target, double z) {
    const Variable& var = ix.net->variables[static_cast<std::size_t>(target)];
    Factor m = f;
    for (int v : f.vars)
        if (v != target) m = sum_out(m, v);
    Marginal out{var.name, var.space.states, std::vector<double>(var.space.size(), 0.0)};
    for (std::size_t s = 0; s < out.probabilities.size(); ++s)
        out.probabilities[s] = m.values[s] / z;
    return out;
}

} // namespace

std::map<std::string, Marginal> posterior(const CompiledNetwork& net, const Evidence& evidence,
                                          const std::vector<std::string>& targets) {
    IndexedNetwork ix(net);
    double z = total_mass(query_joint(ix, evidence, {}));
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");

    std::map<std::string, Marginal> out;
    for (const auto& tname : targets) {
        int t = ix.require(tname);
        const Variable& var = net.variables[static_cast<std::size_t>(t)];
        auto eit = evidence.find(tname);
        if (eit != evidence.end()) {
            auto s = var.space.index_of(eit->second);
            if (!s) throw RefError("'" + eit->second + "' is not a state of '" + tname + "'");
            Marginal m{tname, var.space.states, std::vector<double>(var.space.size(), 0.0)};
            m.probabilities[*s] = 1.0;
            out[tname] = std::move(m);
            continue;
        }
        Factor f = query_joint(ix, evidence, {t});
        out[tname] = marginal_from_factor(ix, f, t, total_mass(f));
    }
    return out;
}

double evidence_probability(const CompiledNetwork& net, const Evidence& evidence) {
    IndexedNetwork ix(net);
    return total_mass(query_joint(ix, evidence, {}));
}

Factor joint_posterior(const CompiledNetwork& net, const Evidence& evidence,
                       const std::vector<std::string>& targets) {
    IndexedNetwork ix(net);
    std::vector<int> t;
    for (const auto& name : targets) {
        if (evidence.count(name)) throw RefError("joint target '" + name + "' is assigned in evidence");
        t.push_back(ix.require(name));
    }
    Factor f = query_joint(ix, evidence, t);
    double z = total_mass(f);
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");
    for (double& v : f.values) v /= z;
    return f;
}

namespace {

std::size_t joint_size_guarded(const CompiledNetwork& net) {
    std::size_t total = 1;
    for (const auto& v : net.variables) {
        total *= v.space.size();
        if (total > kOracleStateLimit)
            throw TooLargeForOracle("joint state space exceeds " + std::to_string(kOracleStateLimit) +
                                    " configurations");
    }
    return total;
}

// walks the full joint; calls visit(config, probability)
template <typename F>
void enumerate_joint(const IndexedNetwork& ix, F&& visit) {
    const auto& vars = ix.net->variables;
    std::vector<std::size_t> config(vars.size(), 0);
    bool done = vars.empty();
    while (!done) {
        double p = 1.0;
        for (std::size_t v = 0; v < vars.size() && p > 0.0; ++v) {
            const auto& pidx = ix.parent_idx[v];
            std::size_t row = 0;
            for (int pv : pidx)
                row = row * vars[static_cast<std::size_t>(pv)].space.size() +
                      config[static_cast<std::size_t>(pv)];
            p *= ix.net->cpts.at(vars[v].name)[row][config[v]];
        }
        visit(config, p);
        done = true;
        for (std::size_t d = vars.size(); d-- > 0;) {
            if (++config[d] < vars[d].space.size()) { done = false; break; }
            config[d] = 0;
        }
    }
}

} // namespace

std::map<std::string, Marginal> brute_force_posterior(const CompiledNetwork& net,
                                                      const Evidence& evidence,
                                                      const std::vector<std::string>& targets) {
    joint_size_guarded(net);
    IndexedNetwork ix(net);
    auto ev = index_evidence(ix, evidence);
    std::vector<int> tidx;
    for (const auto& t : targets) tidx.push_back(ix.require(t));

    std::vector<std::vector<double>> bins;
    for (int t : tidx)
        bins.emplace_back(net.variables[static_cast<std::size_t>(t)].space.size(), 0.0);
    double z = 0.0;
    enumerate_joint(ix, [&](const std::vector<std::size_t>& config, double p) {
        for (const auto& [v, s] : ev)
            if (config[static_cast<std::size_t>(v)] != static_cast<std::size_t>(s)) return;
        z += p;
        for (std::size_t k = 0; k < tidx.size(); ++k)
            bins[k][config[static_cast<std::size_t>(tidx[k])]] += p;
    });
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");

    std::map<std::string, Marginal> out;
    for (std::size_t k = 0; k < tidx.size(); ++k) {
        Marginal m{targets[k], net.variables[static_cast<std::size_t>(tidx[k])].space.states, bins[k]};
        for (double& p : m.probabilities) p /= z;
        out[targets[k]] = std::move(m);
    }
    return out;
}

double brute_force_evidence_probability(const CompiledNetwork& net, const Evidence& evidence) {
    joint_size_guarded(net);
    IndexedNetwork ix(net);
    auto ev = index_evidence(ix, evidence);
    double z = 0.0;
    enumerate_joint(ix, [&](const std::vector<std::size_t>& config, double p) {
        for (const auto& [v, s] : ev)
            if (config[static_cast<std::size_t>(v)] != static_cast<std::size_t>(s)) return;
        z += p;
    });
    return z;
}

} // namespace bnforge
