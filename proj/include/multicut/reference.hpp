#pragma once

// Verification oracles: exhaustive energy minimization and the local
// polytope LP. Used by tests and acceptance checks only; the solve path
// never calls into this header.

#include <utility>
#include <vector>

#include "multicut/model.hpp"
#include "multicut/simplex.hpp"

namespace multicut {

constexpr double brute_force_cap = 1e7;

/// Global minimizer by enumeration; ties break to the lexicographically
/// smallest labeling. Unsupervised models are enumerated over partitions
/// (restricted-growth strings) instead of labelings.
inline std::pair<labeling, double> brute_force_min(const factor_graph& fg) {
    validate(fg);
    const int n = fg.num_variables;
    if (n == 0) return {labeling{}, 0.0};

    if (fg.mode == graph_mode::unsupervised) {
        if (n > max_partition_order)
            throw unsupported_error("brute_force_min: partition enumeration capped at 10 nodes");
        labeling best;
        double best_value = 0.0;
        for (const auto& part : enumerate_partitions(n)) {
            labeling x(part.rgs.begin(), part.rgs.end());
            double e = eval_energy(fg, x);
            if (best.empty() || e < best_value) {
                best = std::move(x);
                best_value = e;
            }
        }
        return {best, best_value};
    }

    const int L = fg.label_counts[0];
    double space = 1.0;
    for (int v = 0; v < n; ++v) space *= L;
    if (space > brute_force_cap)
        throw unsupported_error("brute_force_min: search space exceeds 1e7 labelings");

    labeling x(static_cast<std::size_t>(n), 0);
    labeling best;
    double best_value = 0.0;
    for (;;) {
        double e = eval_energy(fg, x);
        if (best.empty() || e < best_value) {
            best = x;
            best_value = e;
        }
        // ascending lexicographic successor: last position varies fastest
        int i = n - 1;
        while (i >= 0 && ++x[static_cast<std::size_t>(i)] == L) {
            x[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return {best, best_value};
}

/// Optimum of the LP over the local polytope: marginal vectors per variable
/// and per pairwise factor with normalization and marginalization rows.
inline double local_polytope_lp(const factor_graph& fg) {
    validate(fg);
    if (fg.mode != graph_mode::supervised)
        throw usage_error("local_polytope_lp: supervised models only");
    for (const factor& f : fg.factors)
        if (f.order() > 2)
            throw unsupported_error("local_polytope_lp: higher-order factor present");

    const int n = fg.num_variables;
    const int L = n > 0 ? fg.label_counts[0] : 0;
    linear_program lp;
    auto node_var = [&](int i, int a) { return i * L + a; };
    for (int i = 0; i < n * L; ++i) {
        (void)i;
        lp.add_variable(0.0, 0.0, 1.0);
    }
    std::vector<int> pair_base;
    for (const factor& f : fg.factors) {
        if (f.order() == 1) {
            for (int a = 0; a < L; ++a)
                lp.obj[static_cast<std::size_t>(node_var(f.vars[0], a))] +=
                    eval_factor_with_cards(f, {a}, {L});
        } else {
            int base = lp.num_vars();
            pair_base.push_back(base);
            for (int a = 0; a < L; ++a)
                for (int b = 0; b < L; ++b)
                    lp.add_variable(eval_factor_with_cards(f, {a, b}, {L, L}), 0.0, 1.0);
        }
    }
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> terms;
        for (int a = 0; a < L; ++a) terms.emplace_back(node_var(i, a), 1.0);
        lp.add_row(make_row(std::move(terms), row_sense::eq, 1.0, row_class::initial));
    }
    std::size_t pf = 0;
    for (const factor& f : fg.factors) {
        if (f.order() != 2) continue;
        int base = pair_base[pf++];
        int i = f.vars[0], j = f.vars[1];
        for (int b = 0; b < L; ++b) { // sum_a mu_ab = mu_{j;b}
            std::vector<std::pair<int, double>> terms;
            for (int a = 0; a < L; ++a) terms.emplace_back(base + a * L + b, 1.0);
            terms.emplace_back(node_var(j, b), -1.0);
            lp.add_row(make_row(std::move(terms), row_sense::eq, 0.0, row_class::initial));
        }
        for (int a = 0; a < L; ++a) { // sum_b mu_ab = mu_{i;a}
            std::vector<std::pair<int, double>> terms;
            for (int b = 0; b < L; ++b) terms.emplace_back(base + a * L + b, 1.0);
            terms.emplace_back(node_var(i, a), -1.0);
            lp.add_row(make_row(std::move(terms), row_sense::eq, 0.0, row_class::initial));
        }
    }
    auto sol = solve_lp(lp);
    if (sol.status != lp_status::optimal)
        throw internal_error("local_polytope_lp: relaxation reported infeasible");
    return sol.objective_value;
}

} // namespace multicut
