#pragma once

// Mapping relaxed or inconsistent solutions back to labelings: nearest
// terminal, threshold sweeps (derandomized and the 101-step pseudo variant),
// and connected-component rounding for the unsupervised case.

#include <algorithm>
#include <vector>

#include "multicut/errors.hpp"
#include "multicut/reduction.hpp"

namespace multicut {

/// x_v = argmin_t y_tv, ties to the lowest label index.
inline labeling round_nearest(const multicut_instance& inst, const std::vector<double>& y) {
    if (!inst.supervised()) throw usage_error("round_nearest: requires terminals");
    labeling x(static_cast<std::size_t>(inst.num_internal), 0);
    for (int v = 0; v < inst.num_internal; ++v) {
        int best = 0;
        double best_val = y[static_cast<std::size_t>(inst.edge_var(v, inst.terminal_node(0)))];
        for (int l = 1; l < inst.num_terminals; ++l) {
            double val = y[static_cast<std::size_t>(inst.edge_var(v, inst.terminal_node(l)))];
            if (val < best_val) {
                best_val = val;
                best = l;
            }
        }
        x[static_cast<std::size_t>(v)] = best;
    }
    return x;
}

/// All distinct terminal-edge values plus 0, ascending. Zero is included so
/// the sweep covers the assignment below the smallest terminal value, which
/// makes the best-over-thresholds energy dominate any equidistant sweep.
inline std::vector<double> derandomized_thresholds(const multicut_instance& inst,
                                                   const std::vector<double>& y) {
    std::vector<double> t{0.0};
    for (int v = 0; v < inst.num_internal; ++v)
        for (int l = 0; l < inst.num_terminals; ++l)
            t.push_back(
                detail::clamp01(y[static_cast<std::size_t>(inst.edge_var(v, inst.terminal_node(l)))]));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

/// 0, 0.01, ..., 0.99, 1.
inline std::vector<double> pseudo_thresholds() {
    std::vector<double> t(101);
    for (int i = 0; i <= 100; ++i) t[static_cast<std::size_t>(i)] = i / 100.0;
    return t;
}

/// Threshold rounding: for each rho assign the first label (fixed order)
/// whose terminal edge is at most rho, the last label otherwise; keep the
/// labeling with the lowest cost over all thresholds.
inline labeling round_derandomized(const multicut_instance& inst, const std::vector<double>& y,
                                   const std::vector<double>& thresholds) {
    if (!inst.supervised()) throw usage_error("round_derandomized: requires terminals");
    if (thresholds.empty()) throw input_error("round_derandomized: empty threshold list");
    const int L = inst.num_terminals;
    labeling best;
    double best_cost = 0.0;
    labeling x(static_cast<std::size_t>(inst.num_internal), 0);
    for (double rho : thresholds) {
        for (int v = 0; v < inst.num_internal; ++v) {
            int pick = L - 1;
            for (int l = 0; l < L; ++l) {
                double val = y[static_cast<std::size_t>(inst.edge_var(v, inst.terminal_node(l)))];
                if (val <= rho) {
                    pick = l;
                    break;
                }
            }
            x[static_cast<std::size_t>(v)] = pick;
        }
        auto p = induce_point(inst, x);
        double cost = multicut_cost(inst, p.y, p.s);
        if (best.empty() || cost < best_cost) {
            best = x;
            best_cost = cost;
        }
    }
    return best;
}

/// Components of the kappa-thresholded graph: shores are the connected
/// components of {e : y_e <= kappa}; the projected point cuts exactly the
/// component-crossing edges, which is always a consistent multicut.
inline std::pair<std::vector<double>, labeling>
round_components(const multicut_instance& inst, const std::vector<double>& y, double kappa) {
    if (inst.supervised()) throw usage_error("round_components: unsupervised instances only");
    if (kappa < 0.0 || kappa >= 1.0) throw input_error("round_components: kappa must be in [0,1)");
    const int n = inst.num_internal;
    labeling comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
    for (int e = 0; e < inst.num_edge_vars(); ++e) {
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        if (y[static_cast<std::size_t>(e)] <= kappa) {
            adj[static_cast<std::size_t>(ed.u)].push_back({ed.v, e});
            adj[static_cast<std::size_t>(ed.v)].push_back({ed.u, e});
        }
    }
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        comp[static_cast<std::size_t>(s)] = next;
        std::vector<int> stack{s};
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (const auto& [z, e] : adj[static_cast<std::size_t>(x)]) {
                (void)e;
                if (comp[static_cast<std::size_t>(z)] >= 0) continue;
                comp[static_cast<std::size_t>(z)] = next;
                stack.push_back(z);
            }
        }
        ++next;
    }
    std::vector<double> projected(static_cast<std::size_t>(inst.num_edge_vars()));
    for (int e = 0; e < inst.num_edge_vars(); ++e) {
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        projected[static_cast<std::size_t>(e)] =
            comp[static_cast<std::size_t>(ed.u)] == comp[static_cast<std::size_t>(ed.v)] ? 0.0
                                                                                         : 1.0;
    }
    return {std::move(projected), std::move(comp)};
}

} // namespace multicut
