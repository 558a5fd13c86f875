#pragma once

// Factor graph -> multicut instance: graph construction for the supervised
// and unsupervised cases, terminal-edge weights, the product-term reduction
// with its two row families, and the higher-order attachments (generic
// partition-weight factors and the cheaper all-in-one-shore form).

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "multicut/errors.hpp"
#include "multicut/model.hpp"
#include "multicut/rows.hpp"
#include "multicut/simplex.hpp"

namespace multicut {

// Row terms inside a multicut_instance reference edge variables by edge id
// and auxiliary variables by (aux_term_bit | aux id), so edge ids stay stable
// when later attachments add weight-0 edges. make_linear_program resolves
// the split into one contiguous variable space.
constexpr int aux_term_bit = 1 << 28;

inline int aux_term(int aux_id) { return aux_term_bit | aux_id; }

struct multicut_edge {
    int u = 0, v = 0; // u < v, node ids; terminals follow internal nodes
    double weight = 0.0;
};

struct aux_variable {
    double objective = 0.0;
    bool integral = false;          // only (a)-family reductions need this
    std::vector<int> pos_literals;  // edge ids entering as z_e
    std::vector<int> neg_literals;  // edge ids entering as (1 - z_e)
};

struct multicut_instance {
    int num_internal = 0;
    int num_terminals = 0;
    std::vector<multicut_edge> edges;
    std::vector<aux_variable> aux_vars;
    std::vector<constraint_row> fixed_rows;
    double constant_offset = 0.0;

    bool supervised() const { return num_terminals > 0; }
    int num_nodes() const { return num_internal + num_terminals; }
    int terminal_node(int label) const { return num_internal + label; }
    bool is_terminal_node(int node) const { return node >= num_internal; }
    int num_edge_vars() const { return static_cast<int>(edges.size()); }
    int num_aux_vars() const { return static_cast<int>(aux_vars.size()); }

    int find_edge(int u, int v) const {
        auto it = edge_index_.find(edge_key(u, v));
        return it == edge_index_.end() ? -1 : it->second;
    }

    int edge_var(int u, int v) const {
        int e = find_edge(u, v);
        if (e < 0) throw internal_error("edge_var: no such edge");
        return e;
    }

    bool is_terminal_edge(int e) const {
        return is_terminal_node(edges[static_cast<std::size_t>(e)].u) ||
               is_terminal_node(edges[static_cast<std::size_t>(e)].v);
    }

    /// Add weight to the edge, creating it if absent. Returns the edge id.
    int add_edge(int u, int v, double weight) {
        if (u == v) throw input_error("add_edge: self loop");
        if (u > v) std::swap(u, v);
        auto [it, fresh] = edge_index_.try_emplace(edge_key(u, v), num_edge_vars());
        if (fresh) {
            if (!aux_vars.empty())
                throw internal_error("add_edge: edges are fixed once auxiliaries exist");
            edges.push_back({u, v, weight});
        } else {
            edges[static_cast<std::size_t>(it->second)].weight += weight;
        }
        return it->second;
    }

    int ensure_edge(int u, int v) { return find_edge(u, v) >= 0 ? find_edge(u, v) : add_edge(u, v, 0.0); }

private:
    static std::uint64_t edge_key(int u, int v) {
        if (u > v) std::swap(u, v);
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
               static_cast<std::uint32_t>(v);
    }
    std::unordered_map<std::uint64_t, int> edge_index_;
};

// ---------------------------------------------------------------------------
// terminal weights
// ---------------------------------------------------------------------------

/// Weights u with sum_{l != l*} u_l = g_{l*} for every l*: cutting all
/// terminal edges except the chosen label's costs exactly the unary value.
inline std::vector<double> terminal_weights(const std::vector<double>& g) {
    const int L = static_cast<int>(g.size());
    if (L < 2) throw input_error("terminal_weights: need at least two labels");
    double total = 0.0;
    for (double v : g) total += v;
    std::vector<double> u(g.size());
    for (int l = 0; l < L; ++l)
        u[static_cast<std::size_t>(l)] = total / (L - 1) - g[static_cast<std::size_t>(l)];
    return u;
}

// ---------------------------------------------------------------------------
// product-term reduction
// ---------------------------------------------------------------------------

enum class reduction_family { both, a_only, b_only };

/// Rows forcing s = prod_{i in pos} z_i * prod_{i in neg} (1 - z_i).
/// Row order: the aggregated (a) row first, the per-literal (b) rows next,
/// and the shared lower-bound row last. Caller supplies the variable ids.
inline std::vector<constraint_row> product_reduction_rows(
    const std::vector<int>& pos, const std::vector<int>& neg, int aux_var,
    reduction_family family = reduction_family::both) {
    if (pos.empty() && neg.empty())
        throw input_error("product_reduction_rows: empty literal sets");
    const int m = static_cast<int>(pos.size() + neg.size());
    std::vector<constraint_row> rows;

    if (family != reduction_family::b_only) {
        // M s <= sum pos z + sum neg (1 - z)
        std::vector<std::pair<int, double>> terms{{aux_var, static_cast<double>(m)}};
        for (int v : pos) terms.emplace_back(v, -1.0);
        for (int v : neg) terms.emplace_back(v, 1.0);
        rows.push_back(make_row(std::move(terms), row_sense::le,
                                static_cast<double>(neg.size()), row_class::reduction_a));
    }
    if (family != reduction_family::a_only) {
        for (int v : pos) // s <= z_i
            rows.push_back(
                make_row({{aux_var, 1.0}, {v, -1.0}}, row_sense::le, 0.0, row_class::reduction_b));
        for (int v : neg) // s <= 1 - z_i
            rows.push_back(
                make_row({{aux_var, 1.0}, {v, 1.0}}, row_sense::le, 1.0, row_class::reduction_b));
    }
    {
        // s >= 1 - M + sum pos z + sum neg (1 - z); shared by both families
        std::vector<std::pair<int, double>> terms{{aux_var, 1.0}};
        for (int v : pos) terms.emplace_back(v, -1.0);
        for (int v : neg) terms.emplace_back(v, 1.0);
        rows.push_back(make_row(std::move(terms), row_sense::ge,
                                1.0 - m + static_cast<double>(neg.size()),
                                row_class::reduction_b));
    }
    return rows;
}

/// Instance-level reduction: creates the auxiliary variable, appends the
/// combined row set (both families) and returns the aux id.
inline int reduce_product_term(multicut_instance& inst, const std::vector<int>& pos_edges,
                               const std::vector<int>& neg_edges) {
    if (pos_edges.empty() && neg_edges.empty())
        throw input_error("reduce_product_term: empty literal sets");
    int aux_id = inst.num_aux_vars();
    aux_variable aux;
    aux.pos_literals = pos_edges;
    aux.neg_literals = neg_edges;
    inst.aux_vars.push_back(std::move(aux));
    auto rows = product_reduction_rows(pos_edges, neg_edges, aux_term(aux_id));
    for (auto& r : rows) inst.fixed_rows.push_back(std::move(r));
    return aux_id;
}

// ---------------------------------------------------------------------------
// higher-order attachments
// ---------------------------------------------------------------------------

/// Generic attachment of a partition-weight factor: one auxiliary per
/// partition of the scope, product reduction against the scope's pairwise
/// cut pattern, the partition weight as objective coefficient, and one
/// sum-to-one equality over the partition auxiliaries.
inline void attach_lpi_factor(multicut_instance& inst, const std::vector<int>& scope,
                              const std::vector<double>& weights) {
    const int n = static_cast<int>(scope.size());
    if (n < 2) throw input_error("attach_lpi_factor: order must be >= 2");
    if (n > max_partition_order)
        throw unsupported_error("attach_lpi_factor: order cap exceeded (Bell growth)");
    if (weights.size() != static_cast<std::size_t>(bell_number(n)))
        throw input_error("attach_lpi_factor: weight count must equal Bell(N)");

    std::vector<int> pair_edges; // lexicographic pair order over the scope
    pair_edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            pair_edges.push_back(inst.ensure_edge(scope[static_cast<std::size_t>(i)],
                                                  scope[static_cast<std::size_t>(j)]));

    const auto& parts = detail::partition_table(n);
    std::vector<std::pair<int, double>> sum_terms;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::vector<int> pos, neg;
        for (std::size_t k = 0; k < pair_edges.size(); ++k)
            (parts[i].chi[k] ? pos : neg).push_back(pair_edges[k]);
        int aux_id = reduce_product_term(inst, pos, neg);
        inst.aux_vars[static_cast<std::size_t>(aux_id)].objective = weights[i];
        sum_terms.emplace_back(aux_term(aux_id), 1.0);
    }
    inst.fixed_rows.push_back(
        make_row(std::move(sum_terms), row_sense::eq, 1.0, row_class::sum_to_one));
}

/// All-in-one-shore factor: a single auxiliary for prod_{e in E_A} (1 - y_e)
/// over a connected spanning edge set of the scope; contributes
/// unequal + (equal - unequal) * s.
inline void attach_hopotts_factor(multicut_instance& inst, const std::vector<int>& scope,
                                  double equal, double unequal) {
    const int n = static_cast<int>(scope.size());
    if (n < 2) throw input_error("attach_hopotts_factor: order must be >= 2");

    // connectivity of the existing intra-scope edges (union-find over scope)
    std::vector<int> parent(scope.size());
    for (std::size_t i = 0; i < scope.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (inst.find_edge(scope[static_cast<std::size_t>(i)],
                               scope[static_cast<std::size_t>(j)]) >= 0)
                parent[static_cast<std::size_t>(find(i))] = find(j);
    for (int i = 1; i < n; ++i)
        if (find(i) != find(0)) {
            inst.add_edge(scope[0], scope[static_cast<std::size_t>(i)], 0.0);
            parent[static_cast<std::size_t>(find(i))] = find(0);
        }

    std::vector<int> span_edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            int e = inst.find_edge(scope[static_cast<std::size_t>(i)],
                                   scope[static_cast<std::size_t>(j)]);
            if (e >= 0) span_edges.push_back(e);
        }
    int aux_id = reduce_product_term(inst, {}, span_edges);
    inst.aux_vars[static_cast<std::size_t>(aux_id)].objective = equal - unequal;
    inst.constant_offset += unequal;
}

// ---------------------------------------------------------------------------
// build_multicut
// ---------------------------------------------------------------------------

inline multicut_instance build_multicut(const factor_graph& fg) {
    validate(fg);
    multicut_instance inst;
    inst.num_internal = fg.num_variables;

    std::vector<const factor*> higher; // factors handled by attachments
    // phase 1: pairwise weights and unary aggregation; all edges must exist
    // before the first auxiliary variable is created
    std::vector<std::vector<double>> unary;
    if (fg.mode == graph_mode::supervised) {
        inst.num_terminals = fg.label_counts.empty() ? 0 : fg.label_counts[0];
        unary.assign(static_cast<std::size_t>(fg.num_variables),
                     std::vector<double>(static_cast<std::size_t>(inst.num_terminals), 0.0));
    }

    for (const factor& f : fg.factors) {
        switch (f.kind) {
        case factor_kind::table:
            if (f.order() == 1) {
                for (std::size_t l = 0; l < f.values.size(); ++l)
                    unary[static_cast<std::size_t>(f.vars[0])][l] += f.values[l];
            } else {
                throw model_error(
                    "build_multicut: table factors of order >= 2 are not label "
                    "permutation invariant");
            }
            break;
        case factor_kind::potts:
            inst.add_edge(f.vars[0], f.vars[1], f.unequal - f.equal);
            inst.constant_offset += f.equal;
            break;
        case factor_kind::hopotts:
            if (f.order() == 2) {
                inst.add_edge(f.vars[0], f.vars[1], f.unequal - f.equal);
                inst.constant_offset += f.equal;
            } else {
                higher.push_back(&f);
            }
            break;
        case factor_kind::lpi:
            if (f.order() == 2) {
                inst.add_edge(f.vars[0], f.vars[1], f.values[1] - f.values[0]);
                inst.constant_offset += f.values[0];
            } else {
                higher.push_back(&f);
            }
            break;
        case factor_kind::junction:
            higher.push_back(&f);
            break;
        }
    }

    // phase 2: pre-create the edges the attachments will need
    for (const factor* f : higher) {
        if (f->kind == factor_kind::lpi || f->kind == factor_kind::junction) {
            for (std::size_t i = 0; i < f->vars.size(); ++i)
                for (std::size_t j = i + 1; j < f->vars.size(); ++j)
                    inst.ensure_edge(f->vars[i], f->vars[j]);
        } else { // hopotts: connect the scope with weight-0 edges if needed
            const auto& scope = f->vars;
            const int n = static_cast<int>(scope.size());
            std::vector<int> parent(scope.size());
            for (std::size_t i = 0; i < scope.size(); ++i) parent[i] = static_cast<int>(i);
            auto find = [&](int a) {
                while (parent[static_cast<std::size_t>(a)] != a)
                    a = parent[static_cast<std::size_t>(a)] =
                        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                return a;
            };
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (inst.find_edge(scope[static_cast<std::size_t>(i)],
                                       scope[static_cast<std::size_t>(j)]) >= 0)
                        parent[static_cast<std::size_t>(find(i))] = find(j);
            for (int i = 1; i < n; ++i)
                if (find(i) != find(0)) {
                    inst.add_edge(scope[0], scope[static_cast<std::size_t>(i)], 0.0);
                    parent[static_cast<std::size_t>(find(i))] = find(0);
                }
        }
    }

    // phase 3: terminal edges, terminal-terminal edges, node equalities
    if (fg.mode == graph_mode::supervised) {
        const int L = inst.num_terminals;
        for (int v = 0; v < fg.num_variables; ++v) {
            auto w = terminal_weights(unary[static_cast<std::size_t>(v)]);
            for (int l = 0; l < L; ++l)
                inst.add_edge(v, inst.terminal_node(l), w[static_cast<std::size_t>(l)]);
        }
        for (int a = 0; a < L; ++a)
            for (int b = a + 1; b < L; ++b)
                inst.add_edge(inst.terminal_node(a), inst.terminal_node(b), 0.0);

        for (int v = 0; v < fg.num_variables; ++v) {
            std::vector<std::pair<int, double>> terms;
            for (int l = 0; l < L; ++l)
                terms.emplace_back(inst.edge_var(v, inst.terminal_node(l)), 1.0);
            inst.fixed_rows.push_back(
                make_row(std::move(terms), row_sense::eq, L - 1.0, row_class::initial));
        }
        for (int a = 0; a < L; ++a)
            for (int b = a + 1; b < L; ++b)
                inst.fixed_rows.push_back(make_row(
                    {{inst.edge_var(inst.terminal_node(a), inst.terminal_node(b)), 1.0}},
                    row_sense::eq, 1.0, row_class::terminal_fixed));
    }

    // phase 4: attachments (edges are final from here on)
    for (const factor* f : higher) {
        switch (f->kind) {
        case factor_kind::lpi:
            attach_lpi_factor(inst, f->vars, f->values);
            break;
        case factor_kind::junction:
            attach_lpi_factor(inst, f->vars, junction_to_lpi(f->lambda));
            break;
        case factor_kind::hopotts:
            attach_hopotts_factor(inst, f->vars, f->equal, f->unequal);
            break;
        default:
            throw internal_error("build_multicut: unexpected factor kind");
        }
    }
    return inst;
}

// ---------------------------------------------------------------------------
// costs and induced points
// ---------------------------------------------------------------------------

inline double multicut_cost(const multicut_instance& inst, const std::vector<double>& y,
                            const std::vector<double>& s) {
    if (static_cast<int>(y.size()) != inst.num_edge_vars() ||
        static_cast<int>(s.size()) != inst.num_aux_vars())
        throw input_error("multicut_cost: vector sizes do not match the instance");
    double total = inst.constant_offset;
    for (int e = 0; e < inst.num_edge_vars(); ++e)
        total += inst.edges[static_cast<std::size_t>(e)].weight * y[static_cast<std::size_t>(e)];
    for (int k = 0; k < inst.num_aux_vars(); ++k)
        total +=
            inst.aux_vars[static_cast<std::size_t>(k)].objective * s[static_cast<std::size_t>(k)];
    return total;
}

struct induced_point {
    std::vector<double> y;
    std::vector<double> s;
};

/// Integral (y, s) induced by a labeling: cut indicators on every edge and
/// product values on every auxiliary.
inline induced_point induce_point(const multicut_instance& inst, const labeling& x) {
    if (static_cast<int>(x.size()) != inst.num_internal)
        throw input_error("induce_point: labeling length mismatch");
    induced_point p;
    p.y.resize(static_cast<std::size_t>(inst.num_edge_vars()));
    // terminal t_l joins the shore of label l; terminal pairs are always cut
    for (int e = 0; e < inst.num_edge_vars(); ++e) {
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        int lu, lv;
        if (inst.is_terminal_node(ed.u))
            lu = ed.u - inst.num_internal;
        else
            lu = x[static_cast<std::size_t>(ed.u)];
        if (inst.is_terminal_node(ed.v))
            lv = ed.v - inst.num_internal;
        else
            lv = x[static_cast<std::size_t>(ed.v)];
        bool both_terminal = inst.is_terminal_node(ed.u) && inst.is_terminal_node(ed.v);
        p.y[static_cast<std::size_t>(e)] = (both_terminal || lu != lv) ? 1.0 : 0.0;
    }
    p.s.resize(static_cast<std::size_t>(inst.num_aux_vars()));
    for (int k = 0; k < inst.num_aux_vars(); ++k) {
        const auto& aux = inst.aux_vars[static_cast<std::size_t>(k)];
        double prod = 1.0;
        for (int e : aux.pos_literals) prod *= p.y[static_cast<std::size_t>(e)];
        for (int e : aux.neg_literals) prod *= 1.0 - p.y[static_cast<std::size_t>(e)];
        p.s[static_cast<std::size_t>(k)] = prod;
    }
    return p;
}

// ---------------------------------------------------------------------------
// LP assembly
// ---------------------------------------------------------------------------

/// Resolve the edge/aux split into one LP variable space: edge e -> e,
/// aux k -> num_edges + k. Fixed rows are added active.
inline int resolve_term_index(const multicut_instance& inst, int term) {
    return (term & aux_term_bit) ? inst.num_edge_vars() + (term & ~aux_term_bit) : term;
}

inline linear_program make_linear_program(const multicut_instance& inst) {
    linear_program lp;
    for (const auto& e : inst.edges) lp.add_variable(e.weight, 0.0, 1.0);
    for (const auto& a : inst.aux_vars) lp.add_variable(a.objective, 0.0, 1.0);
    lp.obj_constant = inst.constant_offset;
    for (const constraint_row& row : inst.fixed_rows) {
        constraint_row r = row;
        for (auto& [v, c] : r.terms) {
            (void)c;
            v = resolve_term_index(inst, v);
        }
        lp.add_row(std::move(r), true);
    }
    return lp;
}

} // namespace multicut
