#pragma once

// Separation procedures over a multicut instance: cycle inequalities with
// the bounded / integer / chordless search variants, terminal triangles,
// multi-terminal inequalities, odd wheels, and the schedule grammar that
// sequences them.

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "multicut/errors.hpp"
#include "multicut/reduction.hpp"
#include "multicut/rows.hpp"

namespace multicut {

constexpr double separation_eps = 1e-8; // rows must be violated by more than this

// ---------------------------------------------------------------------------
// schedule grammar
// ---------------------------------------------------------------------------

struct cycle_options {
    bool integer_mode = false; // breadth-first search on the zero subgraph
    bool facet_only = false;   // chordless (facet-defining) paths only
    bool bounded = false;      // connected-component preprocessing, gamma = 1
};

enum class stage_kind {
    integer_switch,
    cycles,
    terminal,
    multi_terminal,
    terminal_integer,
    odd_wheel,
};

struct schedule_stage {
    stage_kind kind = stage_kind::cycles;
    cycle_options cyc;
    std::string token;
};

struct schedule {
    std::string text;
    std::vector<schedule_stage> stages;

    bool has_integer_phase() const {
        for (const auto& s : stages)
            if (s.kind == stage_kind::integer_switch) return true;
        return false;
    }
    bool needs_terminals() const {
        for (const auto& s : stages)
            if (s.kind == stage_kind::terminal || s.kind == stage_kind::multi_terminal ||
                s.kind == stage_kind::terminal_integer)
                return true;
        return false;
    }
};

/// Grammar: "MC" ("-" TOKEN)+ with TOKEN := "I" | "T" | "MT" | "TI" | "OW"
/// | "C"["I"]["F"]["B"]. Integer-only procedures (CI*, TI) must follow an I.
inline schedule parse_schedule(const std::string& text) {
    schedule out;
    out.text = text;
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t dash = text.find('-', start);
        if (dash == std::string::npos) dash = text.size();
        tokens.push_back(text.substr(start, dash - start));
        start = dash + 1;
    }
    if (tokens.empty() || tokens[0] != "MC")
        throw parse_error("schedule must start with \"MC\": " + text);
    if (tokens.size() < 2) throw parse_error("schedule needs at least one procedure: " + text);

    bool integer_seen = false;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        schedule_stage st;
        st.token = tok;
        if (tok == "I") {
            st.kind = stage_kind::integer_switch;
            integer_seen = true;
        } else if (tok == "T") {
            st.kind = stage_kind::terminal;
        } else if (tok == "MT") {
            st.kind = stage_kind::multi_terminal;
        } else if (tok == "TI") {
            st.kind = stage_kind::terminal_integer;
            if (!integer_seen)
                throw parse_error("token \"TI\" requires a preceding \"I\" stage: " + text);
        } else if (tok == "OW") {
            st.kind = stage_kind::odd_wheel;
        } else if (!tok.empty() && tok[0] == 'C') {
            st.kind = stage_kind::cycles;
            std::size_t k = 1;
            if (k < tok.size() && tok[k] == 'I') {
                st.cyc.integer_mode = true;
                ++k;
            }
            if (k < tok.size() && tok[k] == 'F') {
                st.cyc.facet_only = true;
                ++k;
            }
            if (k < tok.size() && tok[k] == 'B') {
                st.cyc.bounded = true;
                ++k;
            }
            if (k != tok.size()) throw parse_error("malformed token \"" + tok + "\": " + text);
            if (st.cyc.integer_mode && !integer_seen)
                throw parse_error("token \"" + tok + "\" requires a preceding \"I\" stage: " +
                                  text);
        } else {
            throw parse_error("malformed token \"" + tok + "\": " + text);
        }
        out.stages.push_back(std::move(st));
    }
    return out;
}

// ---------------------------------------------------------------------------
// separation report
// ---------------------------------------------------------------------------

struct separation_report {
    std::vector<constraint_row> rows;
    std::array<int, 9> counts_by_class{};
    double max_violation = 0.0;

    void add(constraint_row row, double violation) {
        ++counts_by_class[static_cast<std::size_t>(row.tag)];
        max_violation = std::max(max_violation, violation);
        rows.push_back(std::move(row));
    }
    bool empty() const { return rows.empty(); }
};

namespace detail {

// adjacency over internal nodes only (terminal edges never join cycle rows)
struct internal_graph {
    int n = 0;
    std::vector<std::vector<std::pair<int, int>>> adj; // node -> (neighbor, edge id)
    std::vector<int> internal_edges;                   // edge ids, ascending

    explicit internal_graph(const multicut_instance& inst) : n(inst.num_internal) {
        adj.resize(static_cast<std::size_t>(n));
        for (int e = 0; e < inst.num_edge_vars(); ++e) {
            const auto& ed = inst.edges[static_cast<std::size_t>(e)];
            if (inst.is_terminal_node(ed.u) || inst.is_terminal_node(ed.v)) continue;
            adj[static_cast<std::size_t>(ed.u)].push_back({ed.v, e});
            adj[static_cast<std::size_t>(ed.v)].push_back({ed.u, e});
            internal_edges.push_back(e);
        }
    }
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

struct union_find {
    std::vector<int> parent;
    explicit union_find(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a)
            a = parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
        return a;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// shortest path u -> v avoiding edge `skip`; returns edge ids of the path or
// empty when the distance bound is not beaten
inline std::vector<int> shortest_path(const internal_graph& g, const std::vector<double>& w,
                                      int u, int v, int skip, double bound, bool chordless,
                                      const multicut_instance& inst) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(g.n), inf);
    std::vector<int> pred_node(static_cast<std::size_t>(g.n), -1);
    std::vector<int> pred_edge(static_cast<std::size_t>(g.n), -1);
    std::vector<std::uint8_t> done(static_cast<std::size_t>(g.n), 0);
    using qitem = std::pair<double, int>;
    std::priority_queue<qitem, std::vector<qitem>, std::greater<>> queue;
    dist[static_cast<std::size_t>(u)] = 0.0;
    queue.push({0.0, u});
    while (!queue.empty()) {
        auto [d, x] = queue.top();
        queue.pop();
        if (done[static_cast<std::size_t>(x)]) continue;
        done[static_cast<std::size_t>(x)] = 1;
        if (x == v) break;
        if (d >= bound) break; // nothing shorter can appear
        for (const auto& [z, e] : g.adj[static_cast<std::size_t>(x)]) {
            if (e == skip || done[static_cast<std::size_t>(z)]) continue;
            double nd = d + w[static_cast<std::size_t>(e)];
            if (nd >= dist[static_cast<std::size_t>(z)] || nd >= bound) continue;
            if (chordless) {
                // reject when the extended path has a chord; the closing
                // edge (v, u) itself is the cycle edge, not a chord
                bool chordal = false;
                for (int q = x; q != -1; q = pred_node[static_cast<std::size_t>(q)]) {
                    if (q == x) continue; // immediate predecessor is path-adjacent
                    if (q == z) {
                        chordal = true; // node repeat
                        break;
                    }
                    if (q == u && z == v) continue;
                    if (inst.find_edge(q, z) >= 0) {
                        chordal = true;
                        break;
                    }
                }
                if (chordal) continue;
            }
            dist[static_cast<std::size_t>(z)] = nd;
            pred_node[static_cast<std::size_t>(z)] = x;
            pred_edge[static_cast<std::size_t>(z)] = e;
            queue.push({nd, z});
        }
    }
    if (dist[static_cast<std::size_t>(v)] >= bound) return {};
    std::vector<int> path;
    for (int x = v; x != u; x = pred_node[static_cast<std::size_t>(x)])
        path.push_back(pred_edge[static_cast<std::size_t>(x)]);
    return path;
}

// breadth-first search in the zero subgraph (integer mode)
inline std::vector<int> zero_path(const internal_graph& g, const std::vector<double>& w, int u,
                                  int v, int skip, bool chordless, const multicut_instance& inst) {
    std::vector<int> pred_node(static_cast<std::size_t>(g.n), -1);
    std::vector<int> pred_edge(static_cast<std::size_t>(g.n), -1);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.n), 0);
    std::queue<int> queue;
    seen[static_cast<std::size_t>(u)] = 1;
    queue.push(u);
    while (!queue.empty()) {
        int x = queue.front();
        queue.pop();
        if (x == v) break;
        for (const auto& [z, e] : g.adj[static_cast<std::size_t>(x)]) {
            if (e == skip || seen[static_cast<std::size_t>(z)]) continue;
            if (w[static_cast<std::size_t>(e)] > 0.5) continue; // zero edges only
            if (chordless) {
                bool chordal = false;
                for (int q = x; q != -1; q = pred_node[static_cast<std::size_t>(q)]) {
                    if (q == x) continue;
                    if (q == u && z == v) continue;
                    if (inst.find_edge(q, z) >= 0) {
                        chordal = true;
                        break;
                    }
                }
                if (chordal) continue;
            }
            seen[static_cast<std::size_t>(z)] = 1;
            pred_node[static_cast<std::size_t>(z)] = x;
            pred_edge[static_cast<std::size_t>(z)] = e;
            queue.push(z);
        }
    }
    if (!seen[static_cast<std::size_t>(v)]) return {};
    std::vector<int> path;
    for (int x = v; x != u; x = pred_node[static_cast<std::size_t>(x)])
        path.push_back(pred_edge[static_cast<std::size_t>(x)]);
    return path;
}

} // namespace detail

// ---------------------------------------------------------------------------
// cycle inequalities
// ---------------------------------------------------------------------------

/// For each internal edge uv, search a path P with sum_P y < y_uv - eps and
/// emit sum_{e in P} y_e >= y_uv. At most one row per edge per pass.
inline separation_report separate_cycles(const multicut_instance& inst,
                                         const std::vector<double>& y, cycle_options opts = {}) {
    separation_report report;
    detail::internal_graph g(inst);
    std::vector<double> w(static_cast<std::size_t>(inst.num_edge_vars()), 0.0);
    for (int e = 0; e < inst.num_edge_vars(); ++e)
        w[static_cast<std::size_t>(e)] = detail::clamp01(y[static_cast<std::size_t>(e)]);

    detail::union_find comps(g.n);
    if (opts.bounded) {
        for (int e : g.internal_edges) {
            if (w[static_cast<std::size_t>(e)] < 1.0) {
                const auto& ed = inst.edges[static_cast<std::size_t>(e)];
                comps.unite(ed.u, ed.v);
            }
        }
    }

    for (int e : g.internal_edges) {
        double yuv = w[static_cast<std::size_t>(e)];
        if (yuv <= separation_eps) continue; // a violating path would be negative
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        if (opts.bounded && comps.find(ed.u) != comps.find(ed.v)) continue;

        std::vector<int> path;
        double bound = yuv - separation_eps;
        if (opts.integer_mode) {
            if (yuv > 0.5) // only unit edges can be beaten by a zero path
                path = detail::zero_path(g, w, ed.u, ed.v, e, opts.facet_only, inst);
        } else {
            path = detail::shortest_path(g, w, ed.u, ed.v, e, bound, opts.facet_only, inst);
        }
        if (path.empty()) continue;
        double len = 0.0;
        for (int pe : path) len += w[static_cast<std::size_t>(pe)];
        if (len >= bound) continue;
        std::vector<std::pair<int, double>> terms;
        for (int pe : path) terms.emplace_back(pe, 1.0);
        terms.emplace_back(e, -1.0);
        report.add(make_row(std::move(terms), row_sense::ge, 0.0, row_class::cycle), yuv - len);
    }
    return report;
}

// ---------------------------------------------------------------------------
// terminal triangles
// ---------------------------------------------------------------------------

/// The facet-defining cycle constraints through a terminal: the three
/// triangle forms per (internal edge, terminal). Every violated row is
/// emitted.
inline separation_report separate_terminal_triangles(const multicut_instance& inst,
                                                     const std::vector<double>& y) {
    if (!inst.supervised())
        throw usage_error("separate_terminal_triangles: requires a supervised instance");
    separation_report report;
    detail::internal_graph g(inst);
    auto val = [&](int e) { return detail::clamp01(y[static_cast<std::size_t>(e)]); };

    for (int e : g.internal_edges) {
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        double yuv = val(e);
        for (int l = 0; l < inst.num_terminals; ++l) {
            int t = inst.terminal_node(l);
            int etu = inst.edge_var(ed.u, t);
            int etv = inst.edge_var(ed.v, t);
            double ytu = val(etu), ytv = val(etv);
            struct form {
                double lhs_minus_rhs;
                int a, b, c; // row: y_a + y_b - y_c >= 0
            };
            const form forms[3] = {
                {ytu + ytv - yuv, etu, etv, e},
                {ytu + yuv - ytv, etu, e, etv},
                {ytv + yuv - ytu, etv, e, etu},
            };
            for (const form& f : forms) {
                if (f.lhs_minus_rhs < -separation_eps) {
                    report.add(make_row({{f.a, 1.0}, {f.b, 1.0}, {f.c, -1.0}}, row_sense::ge, 0.0,
                                        row_class::terminal_triangle),
                               -f.lhs_minus_rhs);
                }
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// multi-terminal inequalities
// ---------------------------------------------------------------------------

/// Exact separation of y_uv >= sum_{t in S} (y_tu - y_tv): the maximizing
/// subset keeps exactly the terminals with y_tu > y_tv.
inline separation_report separate_multiterminal(const multicut_instance& inst,
                                                const std::vector<double>& y) {
    if (!inst.supervised())
        throw usage_error("separate_multiterminal: requires a supervised instance");
    separation_report report;
    detail::internal_graph g(inst);
    auto val = [&](int e) { return detail::clamp01(y[static_cast<std::size_t>(e)]); };

    for (int e : g.internal_edges) {
        const auto& ed = inst.edges[static_cast<std::size_t>(e)];
        double lhs = 0.0;
        std::vector<std::pair<int, double>> terms{{e, 1.0}};
        for (int l = 0; l < inst.num_terminals; ++l) {
            int t = inst.terminal_node(l);
            int etu = inst.edge_var(ed.u, t);
            int etv = inst.edge_var(ed.v, t);
            double diff = val(etu) - val(etv);
            if (diff > 0.0) {
                lhs += diff;
                terms.emplace_back(etu, -1.0);
                terms.emplace_back(etv, 1.0);
            }
        }
        double violation = lhs - val(e);
        if (violation > separation_eps)
            report.add(make_row(std::move(terms), row_sense::ge, 0.0, row_class::multi_terminal),
                       violation);
    }
    return report;
}

// ---------------------------------------------------------------------------
// odd wheels
// ---------------------------------------------------------------------------

namespace detail {

// split a closed walk (node sequence, first == last, odd edge count) into a
// simple odd cycle; edge costs are nonnegative so any piece costs no more
inline std::vector<int> simple_odd_cycle(std::vector<int> walk) {
    for (;;) {
        std::vector<int> first_pos;
        bool changed = false;
        std::vector<int> seen_at(1 + *std::max_element(walk.begin(), walk.end()), -1);
        for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
            int v = walk[i];
            int prev = seen_at[static_cast<std::size_t>(v)];
            if (prev < 0) {
                seen_at[static_cast<std::size_t>(v)] = static_cast<int>(i);
                continue;
            }
            // closed subwalk walk[prev..i]; the rest is walk[0..prev]+walk[i..]
            std::size_t inner_len = i - static_cast<std::size_t>(prev);
            std::vector<int> inner(walk.begin() + prev, walk.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            std::vector<int> outer(walk.begin(), walk.begin() + prev + 1);
            outer.insert(outer.end(), walk.begin() + static_cast<std::ptrdiff_t>(i) + 1, walk.end());
            walk = (inner_len % 2 == 1) ? std::move(inner) : std::move(outer);
            changed = true;
            break;
        }
        (void)first_pos;
        if (!changed) return walk;
    }
}

} // namespace detail

/// Odd-wheel search per candidate center: transform rim costs so a violated
/// wheel is an odd closed walk of cost below one half, found by shortest
/// paths in the parity-doubled neighborhood graph.
inline separation_report separate_odd_wheels(const multicut_instance& inst,
                                             const std::vector<double>& y,
                                             int max_rim_length = 25) {
    separation_report report;
    detail::internal_graph g(inst);
    auto val = [&](int e) { return detail::clamp01(y[static_cast<std::size_t>(e)]); };

    for (int c = 0; c < g.n; ++c) {
        const auto& nbrs = g.adj[static_cast<std::size_t>(c)];
        if (nbrs.size() < 3) continue;
        // local indexing of the neighborhood
        std::vector<int> local(static_cast<std::size_t>(g.n), -1);
        std::vector<int> nodes;
        std::vector<int> spoke_edge;
        for (const auto& [z, e] : nbrs) {
            local[static_cast<std::size_t>(z)] = static_cast<int>(nodes.size());
            nodes.push_back(z);
            spoke_edge.push_back(e);
        }
        struct ngh_edge {
            int a, b, edge;
            double cost;
        };
        std::vector<ngh_edge> nedges;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (const auto& [z, e] : g.adj[static_cast<std::size_t>(nodes[i])]) {
                if (z == c) continue;
                int j = local[static_cast<std::size_t>(z)];
                if (j < 0 || j <= static_cast<int>(i)) continue;
                double cost = 0.5 +
                              (val(spoke_edge[i]) + val(spoke_edge[static_cast<std::size_t>(j)])) /
                                  2.0 -
                              val(e);
                nedges.push_back({static_cast<int>(i), j, e, std::max(0.0, cost)});
            }
        if (nedges.size() < 3) continue;

        // parity-doubled shortest path from (s,0) to (s,1)
        const int nn = static_cast<int>(nodes.size());
        std::vector<std::vector<std::pair<int, double>>> dadj(static_cast<std::size_t>(2 * nn));
        auto didx = [&](int i, int p) { return 2 * i + p; };
        for (const auto& ne : nedges) {
            for (int p = 0; p < 2; ++p) {
                dadj[static_cast<std::size_t>(didx(ne.a, p))].push_back(
                    {didx(ne.b, 1 - p), ne.cost});
                dadj[static_cast<std::size_t>(didx(ne.b, p))].push_back(
                    {didx(ne.a, 1 - p), ne.cost});
            }
        }
        double best_cost = 0.5 - separation_eps;
        std::vector<int> best_walk;
        for (int s = 0; s < nn; ++s) {
            const double inf = std::numeric_limits<double>::infinity();
            std::vector<double> dist(static_cast<std::size_t>(2 * nn), inf);
            std::vector<int> pred(static_cast<std::size_t>(2 * nn), -1);
            using qitem = std::pair<double, int>;
            std::priority_queue<qitem, std::vector<qitem>, std::greater<>> queue;
            dist[static_cast<std::size_t>(didx(s, 0))] = 0.0;
            queue.push({0.0, didx(s, 0)});
            while (!queue.empty()) {
                auto [d, x] = queue.top();
                queue.pop();
                if (d > dist[static_cast<std::size_t>(x)]) continue;
                for (const auto& [z, cst] : dadj[static_cast<std::size_t>(x)]) {
                    double nd = d + cst;
                    if (nd < dist[static_cast<std::size_t>(z)] - 1e-15 && nd < best_cost) {
                        dist[static_cast<std::size_t>(z)] = nd;
                        pred[static_cast<std::size_t>(z)] = x;
                        queue.push({nd, z});
                    }
                }
            }
            int target = didx(s, 1);
            if (dist[static_cast<std::size_t>(target)] < best_cost) {
                best_cost = dist[static_cast<std::size_t>(target)];
                best_walk.clear();
                for (int x = target; x != -1; x = pred[static_cast<std::size_t>(x)])
                    best_walk.push_back(x / 2);
            }
        }
        if (best_walk.empty()) continue;
        auto rim = detail::simple_odd_cycle(best_walk); // closed: first == last
        int q = static_cast<int>(rim.size()) - 1;
        if (q < 3 || q > max_rim_length) continue;

        // assemble the wheel row: sum rim y - sum spoke y <= floor(q/2)
        std::vector<std::pair<int, double>> terms;
        double lhs = 0.0;
        bool ok = true;
        for (int i = 0; i < q; ++i) {
            int a = nodes[static_cast<std::size_t>(rim[static_cast<std::size_t>(i)])];
            int b = nodes[static_cast<std::size_t>(rim[static_cast<std::size_t>(i + 1)])];
            int e = inst.find_edge(a, b);
            if (e < 0) {
                ok = false;
                break;
            }
            terms.emplace_back(e, 1.0);
            lhs += val(e);
        }
        if (!ok) continue;
        for (int i = 0; i < q; ++i) {
            int e = spoke_edge[static_cast<std::size_t>(rim[static_cast<std::size_t>(i)])];
            terms.emplace_back(e, -1.0);
            lhs -= val(e);
        }
        double rhs = std::floor(q / 2.0);
        if (lhs - rhs > separation_eps)
            report.add(make_row(std::move(terms), row_sense::le, rhs, row_class::odd_wheel),
                       lhs - rhs);
    }
    return report;
}

} // namespace multicut
