#pragma once

#include <cstddef>
#include <vector>

namespace bnforge {

/// Dense discrete factor over integer-indexed variables.
///
/// `vars` is kept in ascending order; `values` is row-major with the first
/// listed variable most significant. A factor with no variables is a scalar.
struct Factor {
    std::vector<int> vars;
    std::vector<int> card;       // parallel to vars
    std::vector<double> values;  // size = product of card

    static Factor scalar(double v) { return Factor{{}, {}, {v}}; }

    std::size_t size() const { return values.size(); }
    bool has(int var) const;
};

Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, int var);

/// Fix `var` to `state` and drop the dimension.
Factor reduce(const Factor& f, int var, int state);

/// Sum of all entries.
double total_mass(const Factor& f);

} // namespace bnforge
