#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "multicut/errors.hpp"

namespace multicut {

using labeling = std::vector<int>;

enum class graph_mode { supervised, unsupervised };

enum class factor_kind { table, potts, hopotts, lpi, junction };

/// A factor over a sorted list of distinct variable indices.
///
/// Payload by kind:
///   table   - values, flat, lexicographic by label tuple, first variable
///             is the slowest-varying index
///   potts   - equal/unequal (order 2)
///   hopotts - equal if all members share a label, unequal otherwise
///   lpi     - one weight per partition of the scope, in canonical
///             restricted-growth-string order (see enumerate_partitions)
///   junction- lambda if the four members take more than two distinct
///             labels, 0 otherwise
struct factor {
    std::vector<int> vars;
    factor_kind kind = factor_kind::table;
    std::vector<double> values; // table entries or lpi weights
    double equal = 0.0;
    double unequal = 0.0;
    double lambda = 0.0;

    int order() const { return static_cast<int>(vars.size()); }
};

struct factor_graph {
    int num_variables = 0;
    std::vector<int> label_counts; // one entry per variable
    std::vector<factor> factors;
    graph_mode mode = graph_mode::supervised;

    int labels(int v) const { return label_counts[v]; }
};

inline factor make_potts(int u, int v, double equal, double unequal) {
    factor f;
    f.vars = {std::min(u, v), std::max(u, v)};
    f.kind = factor_kind::potts;
    f.equal = equal;
    f.unequal = unequal;
    return f;
}

inline factor make_unary(int v, std::vector<double> values) {
    factor f;
    f.vars = {v};
    f.kind = factor_kind::table;
    f.values = std::move(values);
    return f;
}

// ---------------------------------------------------------------------------
// Partitions of small sets, canonical order
// ---------------------------------------------------------------------------

constexpr int max_partition_order = 10;

inline std::int64_t bell_number(int n) {
    static constexpr std::array<std::int64_t, 11> table = {
        1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
    if (n < 0 || n > max_partition_order)
        throw input_error("bell_number: order out of range");
    return table[static_cast<std::size_t>(n)];
}

/// One partition of {0,..,n-1}: its restricted-growth string, the pairwise
/// cut indicator chi (pair order (0,1),(0,2),..,(1,2),..), and block count.
struct partition_descriptor {
    std::vector<std::uint8_t> rgs;
    std::vector<std::uint8_t> chi;
    int num_blocks = 0;
};

namespace detail {

inline std::vector<std::uint8_t> chi_of_rgs(const std::vector<std::uint8_t>& rgs) {
    const int n = static_cast<int>(rgs.size());
    std::vector<std::uint8_t> chi;
    chi.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            chi.push_back(rgs[i] != rgs[j] ? 1 : 0);
    return chi;
}

} // namespace detail

/// All partitions of an n-element set as restricted-growth strings
/// (a_0 = 0, a_{i+1} <= 1 + max prefix) in ascending lexicographic order.
/// This order is the canonical LPI weight order everywhere in this library.
inline std::vector<partition_descriptor> enumerate_partitions(int n) {
    if (n < 1 || n > max_partition_order)
        throw input_error("enumerate_partitions: order must be in [1, 10]");
    std::vector<partition_descriptor> out;
    out.reserve(static_cast<std::size_t>(bell_number(n)));
    std::vector<std::uint8_t> rgs(static_cast<std::size_t>(n), 0);
    // Iterative successor walk in lexicographic order.
    while (true) {
        partition_descriptor d;
        d.rgs = rgs;
        d.chi = detail::chi_of_rgs(rgs);
        d.num_blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
        out.push_back(std::move(d));
        int i = n - 1;
        for (; i > 0; --i) {
            std::uint8_t max_prefix = *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[i] <= max_prefix) { // can still be incremented
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                break;
            }
        }
        if (i == 0) break;
    }
    return out;
}

namespace detail {

// Cached partition tables; built once per order, read-only afterwards.
inline const std::vector<partition_descriptor>& partition_table(int n) {
    static const auto* tables = [] {
        auto* t = new std::array<std::vector<partition_descriptor>, max_partition_order + 1>();
        for (int k = 1; k <= max_partition_order; ++k)
            (*t)[static_cast<std::size_t>(k)] = enumerate_partitions(k);
        return t;
    }();
    if (n < 1 || n > max_partition_order)
        throw input_error("partition_table: order out of range");
    return (*tables)[static_cast<std::size_t>(n)];
}

// Canonical form of a label tuple: relabel by order of first appearance.
template <typename It>
inline std::vector<std::uint8_t> canonical_rgs(It first, It last) {
    std::vector<std::uint8_t> out;
    std::vector<long long> seen; // label -> block id, linear scan (tuples are tiny)
    std::vector<std::uint8_t> block;
    for (It it = first; it != last; ++it) {
        long long x = static_cast<long long>(*it);
        std::size_t k = 0;
        for (; k < seen.size(); ++k)
            if (seen[k] == x) break;
        if (k == seen.size()) {
            seen.push_back(x);
            block.push_back(static_cast<std::uint8_t>(seen.size() - 1));
        }
        out.push_back(block[k]);
    }
    return out;
}

// Rank of a canonical restricted-growth string in the canonical order.
inline int partition_index(const std::vector<std::uint8_t>& rgs) {
    const auto& table = partition_table(static_cast<int>(rgs.size()));
    auto cmp = [](const partition_descriptor& d, const std::vector<std::uint8_t>& key) {
        return d.rgs < key;
    };
    auto it = std::lower_bound(table.begin(), table.end(), rgs, cmp);
    if (it == table.end() || it->rgs != rgs)
        throw internal_error("partition_index: not a restricted-growth string");
    return static_cast<int>(it - table.begin());
}

} // namespace detail

// ---------------------------------------------------------------------------
// tau: label tuple -> pairwise cut indicator (Def. of label permutation
// invariance evaluates through this map)
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> tau(const std::vector<int>& x) {
    const int n = static_cast<int>(x.size());
    if (n < 2) throw input_error("tau: needs at least two entries");
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            out.push_back(x[i] != x[j] ? 1 : 0);
    return out;
}

/// Expand a junction penalty into LPI weights over the 15 partitions of a
/// 4-element set: lambda wherever the partition has three or more blocks.
inline std::vector<double> junction_to_lpi(double lambda) {
    const auto& parts = detail::partition_table(4);
    std::vector<double> w(parts.size(), 0.0);
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (parts[i].num_blocks >= 3) w[i] = lambda;
    return w;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate(const factor_graph& fg) {
    if (fg.num_variables < 0) throw model_error("negative variable count");
    if (static_cast<int>(fg.label_counts.size()) != fg.num_variables)
        throw model_error("label_counts size mismatch");
    for (int v = 0; v < fg.num_variables; ++v)
        if (fg.label_counts[v] < 1) throw model_error("label count must be positive");
    if (fg.mode == graph_mode::supervised) {
        for (int v = 0; v < fg.num_variables; ++v)
            if (fg.label_counts[v] != fg.label_counts[0] || fg.label_counts[v] < 2)
                throw model_error("supervised mode requires a uniform label count >= 2");
    } else {
        for (int v = 0; v < fg.num_variables; ++v)
            if (fg.label_counts[v] != fg.num_variables)
                throw model_error("unsupervised mode requires label_counts[v] == num_variables");
    }
    for (const factor& f : fg.factors) {
        if (f.vars.empty()) throw model_error("factor with empty scope");
        for (std::size_t i = 0; i < f.vars.size(); ++i) {
            if (f.vars[i] < 0 || f.vars[i] >= fg.num_variables)
                throw model_error("factor variable index out of range");
            if (i > 0 && f.vars[i] <= f.vars[i - 1])
                throw model_error("factor variables must be distinct and ascending");
        }
        if (fg.mode == graph_mode::unsupervised && f.order() == 1)
            throw model_error("unsupervised mode forbids first-order factors");
        switch (f.kind) {
        case factor_kind::table: {
            std::size_t expect = 1;
            for (int v : f.vars) expect *= static_cast<std::size_t>(fg.label_counts[v]);
            if (f.values.size() != expect)
                throw model_error("table factor has wrong number of entries");
            break;
        }
        case factor_kind::potts:
            if (f.order() != 2) throw model_error("potts factor requires exactly 2 variables");
            break;
        case factor_kind::hopotts:
            if (f.order() < 2) throw model_error("hopotts factor requires order >= 2");
            break;
        case factor_kind::lpi:
            if (f.order() < 2 || f.order() > max_partition_order)
                throw model_error("lpi factor order must be in [2, 10]");
            if (f.values.size() != static_cast<std::size_t>(bell_number(f.order())))
                throw model_error("lpi factor needs Bell(N) weights");
            break;
        case factor_kind::junction:
            if (f.order() != 4) throw model_error("junction factor requires exactly 4 variables");
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Energy evaluation
// ---------------------------------------------------------------------------

inline double eval_factor(const factor& f, const std::vector<int>& scope_labels) {
    switch (f.kind) {
    case factor_kind::table:
        // Tables index by label tuple and need the scope cardinalities;
        // use eval_factor_with_cards.
        throw internal_error("table factors need label cardinalities to evaluate");
    case factor_kind::potts:
        return scope_labels[0] == scope_labels[1] ? f.equal : f.unequal;
    case factor_kind::hopotts: {
        for (std::size_t k = 1; k < scope_labels.size(); ++k)
            if (scope_labels[k] != scope_labels[0]) return f.unequal;
        return f.equal;
    }
    case factor_kind::lpi: {
        auto rgs = detail::canonical_rgs(scope_labels.begin(), scope_labels.end());
        return f.values[static_cast<std::size_t>(detail::partition_index(rgs))];
    }
    case factor_kind::junction: {
        auto rgs = detail::canonical_rgs(scope_labels.begin(), scope_labels.end());
        int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
        return blocks > 2 ? f.lambda : 0.0;
    }
    }
    throw internal_error("eval_factor: unknown kind");
}

inline double eval_factor_with_cards(const factor& f, const std::vector<int>& scope_labels,
                                     const std::vector<int>& scope_cards) {
    if (f.kind != factor_kind::table) return eval_factor(f, scope_labels);
    std::size_t idx = 0;
    for (std::size_t k = 0; k < scope_labels.size(); ++k)
        idx = idx * static_cast<std::size_t>(scope_cards[k]) +
              static_cast<std::size_t>(scope_labels[k]);
    return f.values[idx];
}

inline double eval_energy(const factor_graph& fg, const labeling& x) {
    if (static_cast<int>(x.size()) != fg.num_variables)
        throw input_error("eval_energy: labeling length mismatch");
    for (int v = 0; v < fg.num_variables; ++v)
        if (x[v] < 0 || x[v] >= fg.label_counts[v])
            throw input_error("eval_energy: label out of range");
    double total = 0.0;
    std::vector<int> scope_labels, scope_cards;
    for (const factor& f : fg.factors) {
        scope_labels.clear();
        scope_cards.clear();
        for (int v : f.vars) {
            scope_labels.push_back(x[v]);
            scope_cards.push_back(fg.label_counts[v]);
        }
        total += eval_factor_with_cards(f, scope_labels, scope_cards);
    }
    return total;
}

} // namespace multicut
