#include "bnforge/factor.hpp"

#include <algorithm>
#include <cassert>

namespace bnforge {

bool Factor::has(int var) const {
    return std::binary_search(vars.begin(), vars.end(), var);
}

namespace {

// strides[i] = step in `values` when variable i advances by one state
std::vector<std::size_t> strides_of(const Factor& f) {
    std::vector<std::size_t> s(f.vars.size(), 1);
    for (std::size_t i = f.vars.size(); i-- > 1;)
        s[i - 1] = s[i] * static_cast<std::size_t>(f.card[i]);
    return s;
}

} // namespace

Factor multiply(const Factor& a, const Factor& b) {
    if (a.vars.empty()) {
        Factor r = b;
        for (double& v : r.values) v *= a.values[0];
        return r;
    }
    if (b.vars.empty()) {
        Factor r = a;
        for (double& v : r.values) v *= b.values[0];
        return r;
    }

    Factor out;
    std::vector<int> pos_a, pos_b; // for each out var: index in a / b, or -1
    {
        std::size_t i = 0, j = 0;
        while (i < a.vars.size() || j < b.vars.size()) {
            int next;
            if (i < a.vars.size() && (j >= b.vars.size() || a.vars[i] <= b.vars[j]))
                next = a.vars[i];
            else
                next = b.vars[j];
            out.vars.push_back(next);
            int ia = -1, ib = -1;
            if (i < a.vars.size() && a.vars[i] == next) { ia = static_cast<int>(i); ++i; }
            if (j < b.vars.size() && b.vars[j] == next) { ib = static_cast<int>(j); ++j; }
            assert(ia < 0 || ib < 0 || a.card[ia] == b.card[ib]);
            out.card.push_back(ia >= 0 ? a.card[ia] : b.card[ib]);
            pos_a.push_back(ia);
            pos_b.push_back(ib);
        }
    }

    std::size_t n = 1;
    for (int c : out.card) n *= static_cast<std::size_t>(c);
    out.values.resize(n);

    auto sa = strides_of(a);
    auto sb = strides_of(b);
    std::vector<int> idx(out.vars.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a.values[ia] * b.values[ib];
        // odometer increment, last variable fastest
        for (std::size_t d = out.vars.size(); d-- > 0;) {
            ++idx[d];
            if (pos_a[d] >= 0) ia += sa[pos_a[d]];
            if (pos_b[d] >= 0) ib += sb[pos_b[d]];
            if (idx[d] < out.card[d]) break;
            idx[d] = 0;
            if (pos_a[d] >= 0) ia -= sa[pos_a[d]] * static_cast<std::size_t>(out.card[d]);
            if (pos_b[d] >= 0) ib -= sb[pos_b[d]] * static_cast<std::size_t>(out.card[d]);
        }
    }
    return out;
}

Factor sum_out(const Factor& f, int var) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end() || *it != var) return f;
    std::size_t axis = static_cast<std::size_t>(it - f.vars.begin());

    Factor out;
    out.vars.reserve(f.vars.size() - 1);
    out.card.reserve(f.vars.size() - 1);
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        if (i == axis) continue;
        out.vars.push_back(f.vars[i]);
        out.card.push_back(f.card[i]);
    }
    std::size_t n = f.values.size() / static_cast<std::size_t>(f.card[axis]);
    out.values.assign(n, 0.0);

    auto s = strides_of(f);
    std::size_t axis_stride = s[axis];
    std::size_t axis_card = static_cast<std::size_t>(f.card[axis]);
    std::size_t block = axis_stride;                   // inner block below the axis
    std::size_t outer = n / block;                     // blocks above the axis
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t src_base = o * block * axis_card;
        std::size_t dst_base = o * block;
        for (std::size_t a = 0; a < axis_card; ++a)
            for (std::size_t i = 0; i < block; ++i)
                out.values[dst_base + i] += f.values[src_base + a * axis_stride + i];
    }
    return out;
}

Factor reduce(const Factor& f, int var, int state) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end() || *it != var) return f;
    std::size_t axis = static_cast<std::size_t>(it - f.vars.begin());

    Factor out;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        if (i == axis) continue;
        out.vars.push_back(f.vars[i]);
        out.card.push_back(f.card[i]);
    }
    std::size_t n = f.values.size() / static_cast<std::size_t>(f.card[axis]);
    out.values.resize(n);

    auto s = strides_of(f);
    std::size_t axis_stride = s[axis];
    std::size_t axis_card = static_cast<std::size_t>(f.card[axis]);
    std::size_t block = axis_stride;
    std::size_t outer = n / block;
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t src_base = o * block * axis_card + static_cast<std::size_t>(state) * axis_stride;
        std::size_t dst_base = o * block;
        for (std::size_t i = 0; i < block; ++i)
            out.values[dst_base + i] = f.values[src_base + i];
    }
    return out;
}

double total_mass(const Factor& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s;
}

} // namespace bnforge
