#include "bnforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bnforge {

namespace {

// Collects every strongly connected component with more than one member (or
// a self-loop) as a cycle finding. Iterative Tarjan keyed by name.
std::vector<std::vector<std::string>> find_cycles(const CompiledNetwork& net) {
    std::vector<std::string> names;
    std::map<std::string, int> id;
    for (const auto& v : net.variables) {
        id.emplace(v.name, static_cast<int>(names.size()));
        names.push_back(v.name);
    }
    const int n = static_cast<int>(names.size());
    std::vector<std::vector<int>> out(n);
    for (const auto& [child, ps] : net.parents) {
        auto cit = id.find(child);
        if (cit == id.end()) continue;
        for (const auto& p : ps) {
            auto pit = id.find(p);
            if (pit != id.end()) out[pit->second].push_back(cit->second);
        }
    }

    std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    int counter = 0;
    std::vector<std::vector<std::string>> cycles;

    // explicit stack: (node, child position)
    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        std::vector<std::pair<int, std::size_t>> work{{start, 0}};
        while (!work.empty()) {
            auto& [v, pos] = work.back();
            if (pos == 0) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            if (pos < out[v].size()) {
                int w = out[v][pos++];
                if (index[w] == -1) {
                    work.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    std::vector<std::string> scc;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        scc.push_back(names[w]);
                    } while (w != v);
                    bool self_loop = std::find(out[v].begin(), out[v].end(), v) != out[v].end();
                    if (scc.size() > 1 || self_loop) {
                        std::sort(scc.begin(), scc.end());
                        cycles.push_back(std::move(scc));
                    }
                }
                int done = v;
                work.pop_back();
                if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
            }
        }
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
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

ValidationReport validate_network(const CompiledNetwork& net) {
    ValidationReport report;
    auto add = [&](Severity sev, const std::string& subject, std::string msg) {
        report.findings.push_back({sev, subject, std::move(msg)});
    };

    std::set<std::string> seen;
    for (const auto& v : net.variables) {
        if (!seen.insert(v.name).second)
            add(Severity::Error, v.name, "duplicate variable name '" + v.name + "'");
        if (v.space.size() < 2)
            add(Severity::Error, v.name,
                "state space of '" + v.name + "' has fewer than 2 states");
        std::set<std::string> labels(v.space.states.begin(), v.space.states.end());
        if (labels.size() != v.space.states.size())
            add(Severity::Error, v.name, "duplicate state labels in '" + v.name + "'");
    }

    for (const auto& cyc : find_cycles(net))
        add(Severity::Error, cyc.front(), "cycle " + join(cyc, ","));

    for (const auto& v : net.variables) {
        auto pit = net.parents.find(v.name);
        std::vector<StateSpace> parent_spaces;
        bool parents_ok = true;
        if (pit != net.parents.end()) {
            for (const auto& pname : pit->second) {
                const Variable* p = net.find(pname);
                if (!p) {
                    add(Severity::Error, v.name,
                        "'" + v.name + "' references unknown parent '" + pname + "'");
                    parents_ok = false;
                    continue;
                }
                parent_spaces.push_back(p->space);
            }
        } else {
            add(Severity::Error, v.name, "'" + v.name + "' has no parent list");
            parents_ok = false;
        }

        auto cit = net.cpts.find(v.name);
        if (cit == net.cpts.end()) {
            add(Severity::Error, v.name, "'" + v.name + "' has no CPT");
            continue;
        }
        const CptTable& table = cit->second;
        if (parents_ok) {
            std::size_t want = config_count(parent_spaces);
            if (table.size() != want)
                add(Severity::Error, v.name,
                    "CPT of '" + v.name + "' has " + std::to_string(table.size()) + " rows, expected " +
                        std::to_string(want));
        }
        for (std::size_t r = 0; r < table.size(); ++r) {
            const auto& row = table[r];
            if (row.size() != v.space.size()) {
                add(Severity::Error, v.name,
                    "CPT row " + std::to_string(r) + " of '" + v.name + "' has " +
                        std::to_string(row.size()) + " entries, expected " +
                        std::to_string(v.space.size()));
                continue;
            }
            double sum = 0.0;
            bool range_ok = true;
            for (double p : row) {
                if (!(p >= 0.0 && p <= 1.0) || std::isnan(p)) range_ok = false;
                sum += p;
            }
            if (!range_ok)
                add(Severity::Error, v.name,
                    "CPT row " + std::to_string(r) + " of '" + v.name + "' has entries outside [0,1]");
            else if (std::fabs(sum - 1.0) > kRowSumTolerance) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.12g", sum);
                add(Severity::Error, v.name,
                    "CPT row " + std::to_string(r) + " of '" + v.name + "' sums to " + buf);
            }
        }
    }

    for (const auto& [name, tbl] : net.cpts)
        if (!net.find(name))
            add(Severity::Error, name, "CPT for unknown variable '" + name + "'");

    return report;
}

} // namespace bnforge
