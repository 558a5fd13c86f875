#include <catch2/catch_amalgamated.hpp>

#include "multicut/reduction.hpp"
#include "multicut/rng.hpp"

using namespace multicut;

namespace {

factor_graph triangle_correlation(double wab, double wbc, double wac) {
    factor_graph fg;
    fg.num_variables = 3;
    fg.label_counts = {3, 3, 3};
    fg.mode = graph_mode::unsupervised;
    fg.factors.push_back(make_potts(0, 1, 0.0, wab));
    fg.factors.push_back(make_potts(1, 2, 0.0, wbc));
    fg.factors.push_back(make_potts(0, 2, 0.0, wac));
    return fg;
}

// min/max of one variable over the constraint set, edge vars fixed to y
double extreme_value(const multicut_instance& inst, const std::vector<constraint_row>& rows,
                     const std::vector<double>& y_fix, int var, bool maximize) {
    linear_program lp;
    for (int e = 0; e < inst.num_edge_vars(); ++e)
        lp.add_variable(0.0, y_fix[static_cast<std::size_t>(e)], y_fix[static_cast<std::size_t>(e)]);
    for (int k = 0; k < inst.num_aux_vars(); ++k) lp.add_variable(0.0, 0.0, 1.0);
    lp.obj[static_cast<std::size_t>(var)] = maximize ? -1.0 : 1.0;
    for (const constraint_row& row : rows) {
        constraint_row r = row;
        for (auto& [v, c] : r.terms) {
            (void)c;
            v = resolve_term_index(inst, v);
        }
        lp.add_row(std::move(r));
    }
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == lp_status::optimal);
    return sol.values[static_cast<std::size_t>(var)];
}

// enumerate all labelings of a supervised graph
template <typename F>
void for_each_labeling(int n, int labels, F&& fn) {
    labeling x(static_cast<std::size_t>(n), 0);
    for (;;) {
        fn(x);
        int i = 0;
        while (i < n && ++x[static_cast<std::size_t>(i)] == labels) {
            x[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n) break;
    }
}

} // namespace

TEST_CASE("terminal_weights solves the cut-cost identity") {
    SECTION("two labels swap") {
        auto u = terminal_weights({3.0, 5.0});
        CHECK(u[0] == Catch::Approx(5.0));
        CHECK(u[1] == Catch::Approx(3.0));
    }
    SECTION("three labels") {
        auto u = terminal_weights({1.0, 2.0, 3.0});
        CHECK(u[0] == Catch::Approx(2.0));
        CHECK(u[1] == Catch::Approx(1.0));
        CHECK(u[2] == Catch::Approx(0.0));
        // choosing label l cuts all other terminal edges at cost g_l
        for (int l = 0; l < 3; ++l) {
            double cut = 0.0;
            for (int k = 0; k < 3; ++k)
                if (k != l) cut += u[static_cast<std::size_t>(k)];
            CHECK(cut == Catch::Approx(l + 1.0));
        }
    }
    SECTION("zeros stay zeros") {
        auto u = terminal_weights({0.0, 0.0, 0.0, 0.0});
        for (double v : u) CHECK(v == 0.0);
    }
}

TEST_CASE("build_multicut constructs the expected graphs") {
    SECTION("unsupervised triangle") {
        auto inst = build_multicut(triangle_correlation(-1.0, -1.0, 2.0));
        CHECK(inst.num_internal == 3);
        CHECK(inst.num_terminals == 0);
        REQUIRE(inst.num_edge_vars() == 3);
        CHECK(inst.edges[static_cast<std::size_t>(inst.edge_var(0, 1))].weight ==
              Catch::Approx(-1.0));
        CHECK(inst.edges[static_cast<std::size_t>(inst.edge_var(1, 2))].weight ==
              Catch::Approx(-1.0));
        CHECK(inst.edges[static_cast<std::size_t>(inst.edge_var(0, 2))].weight ==
              Catch::Approx(2.0));
        CHECK(inst.constant_offset == 0.0);
    }
    SECTION("supervised pair: 4 nodes, 6 edges, node equalities") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 2};
        fg.mode = graph_mode::supervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, 1.0));
        auto inst = build_multicut(fg);
        CHECK(inst.num_nodes() == 4);
        CHECK(inst.num_edge_vars() == 6); // 1 internal + 4 terminal + 1 between terminals
        int eq_rows = 0, fixed_rows = 0;
        for (const auto& r : inst.fixed_rows) {
            if (r.tag == row_class::initial) ++eq_rows;
            if (r.tag == row_class::terminal_fixed) ++fixed_rows;
        }
        CHECK(eq_rows == 2);
        CHECK(fixed_rows == 1);
    }
    SECTION("parallel factors merge by weight summation") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 2};
        fg.mode = graph_mode::unsupervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, 1.5));
        fg.factors.push_back(make_potts(0, 1, 0.5, -1.0));
        auto inst = build_multicut(fg);
        REQUIRE(inst.num_edge_vars() == 1);
        CHECK(inst.edges[0].weight == Catch::Approx(1.5 + (-1.0 - 0.5)));
        CHECK(inst.constant_offset == Catch::Approx(0.5));
    }
}

TEST_CASE("product reduction rows force the product value") {
    SECTION("all-positive literals at one force s = 1") {
        multicut_instance inst;
        inst.num_internal = 3;
        int e01 = inst.add_edge(0, 1, 0.0);
        int e02 = inst.add_edge(0, 2, 0.0);
        int aux = reduce_product_term(inst, {e01, e02}, {});
        std::vector<double> y = {1.0, 1.0};
        CHECK(extreme_value(inst, inst.fixed_rows, y, inst.num_edge_vars() + aux, false) ==
              Catch::Approx(1.0).margin(1e-9));
        CHECK(extreme_value(inst, inst.fixed_rows, y, inst.num_edge_vars() + aux, true) ==
              Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("negated literal at one forces s = 0") {
        multicut_instance inst;
        inst.num_internal = 2;
        int e01 = inst.add_edge(0, 1, 0.0);
        int aux = reduce_product_term(inst, {}, {e01});
        std::vector<double> y = {1.0};
        CHECK(extreme_value(inst, inst.fixed_rows, y, inst.num_edge_vars() + aux, true) ==
              Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("fractional literals: family (b) is tighter than family (a)") {
        // z = (0.1, 0.3): aggregated row allows s <= 0.2, per-literal rows s <= 0.1
        auto rows_a = product_reduction_rows({0, 1}, {}, 2, reduction_family::a_only);
        auto rows_b = product_reduction_rows({0, 1}, {}, 2, reduction_family::b_only);
        auto max_s = [](const std::vector<constraint_row>& rows) {
            linear_program lp;
            lp.add_variable(0.0, 0.1, 0.1);
            lp.add_variable(0.0, 0.3, 0.3);
            lp.add_variable(-1.0, 0.0, 1.0);
            for (const auto& r : rows) lp.add_row(r);
            auto sol = solve_lp(lp);
            REQUIRE(sol.status == lp_status::optimal);
            return sol.values[2];
        };
        CHECK(max_s(rows_a) == Catch::Approx(0.2).margin(1e-9));
        CHECK(max_s(rows_b) == Catch::Approx(0.1).margin(1e-9));
    }
    SECTION("empty literal sets are rejected") {
        multicut_instance inst;
        inst.num_internal = 2;
        CHECK_THROWS_AS(reduce_product_term(inst, {}, {}), input_error);
        CHECK_THROWS_AS(product_reduction_rows({}, {}, 0), input_error);
    }
}

TEST_CASE("attach_lpi_factor resource counts match the reduction bounds") {
    // order-3 factor on a path graph: one intra-scope edge is missing
    factor_graph fg;
    fg.num_variables = 3;
    fg.label_counts = {3, 3, 3};
    fg.mode = graph_mode::unsupervised;
    fg.factors.push_back(make_potts(0, 1, 0.0, 1.0));
    fg.factors.push_back(make_potts(1, 2, 0.0, 1.0));
    factor f;
    f.vars = {0, 1, 2};
    f.kind = factor_kind::lpi;
    f.values = {0.0, 1.0, 2.0, 3.0, 4.0};
    fg.factors.push_back(f);

    auto inst = build_multicut(fg);
    CHECK(inst.num_edge_vars() == 3); // (0,2) added with weight zero
    CHECK(inst.edges[static_cast<std::size_t>(inst.edge_var(0, 2))].weight == 0.0);
    CHECK(inst.num_aux_vars() == 5); // one per partition
    int reduction_rows = 0, sum_rows = 0;
    for (const auto& r : inst.fixed_rows) {
        if (r.tag == row_class::reduction_a || r.tag == row_class::reduction_b) ++reduction_rows;
        if (r.tag == row_class::sum_to_one) ++sum_rows;
    }
    CHECK(reduction_rows == 25); // B(3) * (3 + 2)
    CHECK(sum_rows == 1);
    CHECK(reduction_rows + sum_rows == 26);

    // generic bound for a higher order
    auto parts = enumerate_partitions(4);
    factor_graph fg4;
    fg4.num_variables = 4;
    fg4.label_counts = {4, 4, 4, 4};
    fg4.mode = graph_mode::unsupervised;
    factor f4;
    f4.vars = {0, 1, 2, 3};
    f4.kind = factor_kind::lpi;
    f4.values.assign(parts.size(), 0.5);
    fg4.factors.push_back(f4);
    auto inst4 = build_multicut(fg4);
    CHECK(inst4.num_edge_vars() <= 6);
    CHECK(inst4.num_aux_vars() == 15);
    CHECK(static_cast<int>(inst4.fixed_rows.size()) <= 15 * (6 + 2) + 1);
}

TEST_CASE("attach_hopotts_factor uses one auxiliary and a spanning edge set") {
    SECTION("scope already connected by a cycle: N + 2 rows") {
        factor_graph fg;
        fg.num_variables = 4;
        fg.label_counts = {4, 4, 4, 4};
        fg.mode = graph_mode::unsupervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, 0.3));
        fg.factors.push_back(make_potts(1, 2, 0.0, 0.3));
        fg.factors.push_back(make_potts(2, 3, 0.0, 0.3));
        fg.factors.push_back(make_potts(0, 3, 0.0, 0.3));
        factor f;
        f.vars = {0, 1, 2, 3};
        f.kind = factor_kind::hopotts;
        f.equal = 0.0;
        f.unequal = 1.0;
        fg.factors.push_back(f);
        auto inst = build_multicut(fg);
        CHECK(inst.num_edge_vars() == 4); // no augmentation needed
        CHECK(inst.num_aux_vars() == 1);
        CHECK(static_cast<int>(inst.fixed_rows.size()) == 4 + 2);
        CHECK(inst.constant_offset == Catch::Approx(1.0));
        CHECK(inst.aux_vars[0].objective == Catch::Approx(-1.0));
    }
    SECTION("disconnected scope gets weight-0 augmentation") {
        factor_graph fg;
        fg.num_variables = 3;
        fg.label_counts = {3, 3, 3};
        fg.mode = graph_mode::unsupervised;
        factor f;
        f.vars = {0, 1, 2};
        f.kind = factor_kind::hopotts;
        f.equal = -1.0;
        f.unequal = 0.0;
        fg.factors.push_back(f);
        auto inst = build_multicut(fg);
        CHECK(inst.num_edge_vars() == 2); // star augmentation from the first node
        CHECK(inst.num_aux_vars() == 1);
        for (const auto& e : inst.edges) CHECK(e.weight == 0.0);
    }
}

TEST_CASE("round trip: induced points cost exactly the labeling energy") {
    SECTION("supervised grid with junction factor") {
        splitmix64 rng(7);
        factor_graph fg;
        fg.num_variables = 4; // 2x2 grid
        fg.label_counts = {3, 3, 3, 3};
        fg.mode = graph_mode::supervised;
        for (int v = 0; v < 4; ++v) {
            std::vector<double> u(3);
            for (auto& x : u) x = rng.uniform(-1.0, 1.0);
            fg.factors.push_back(make_unary(v, u));
        }
        fg.factors.push_back(make_potts(0, 1, 0.2, rng.uniform(-1.0, 1.0)));
        fg.factors.push_back(make_potts(2, 3, -0.1, rng.uniform(-1.0, 1.0)));
        fg.factors.push_back(make_potts(0, 2, 0.0, rng.uniform(-1.0, 1.0)));
        fg.factors.push_back(make_potts(1, 3, 0.0, rng.uniform(-1.0, 1.0)));
        factor j;
        j.vars = {0, 1, 2, 3};
        j.kind = factor_kind::junction;
        j.lambda = 0.8;
        fg.factors.push_back(j);

        auto inst = build_multicut(fg);
        for_each_labeling(4, 3, [&](const labeling& x) {
            auto p = induce_point(inst, x);
            CHECK(multicut_cost(inst, p.y, p.s) ==
                  Catch::Approx(eval_energy(fg, x)).margin(1e-9));
        });
    }
    SECTION("unsupervised with hopotts and lpi factors") {
        splitmix64 rng(11);
        factor_graph fg;
        fg.num_variables = 5;
        fg.label_counts.assign(5, 5);
        fg.mode = graph_mode::unsupervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, rng.uniform(-1.0, 1.0)));
        fg.factors.push_back(make_potts(1, 2, 0.3, rng.uniform(-1.0, 1.0)));
        fg.factors.push_back(make_potts(3, 4, 0.0, rng.uniform(-1.0, 1.0)));
        factor hop;
        hop.vars = {0, 1, 2, 3};
        hop.kind = factor_kind::hopotts;
        hop.equal = rng.uniform(-1.0, 1.0);
        hop.unequal = rng.uniform(-1.0, 1.0);
        fg.factors.push_back(hop);
        factor lpi;
        lpi.vars = {2, 3, 4};
        lpi.kind = factor_kind::lpi;
        lpi.values = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        fg.factors.push_back(lpi);

        auto inst = build_multicut(fg);
        for (const auto& part : enumerate_partitions(5)) {
            labeling x(part.rgs.begin(), part.rgs.end());
            auto p = induce_point(inst, x);
            CHECK(multicut_cost(inst, p.y, p.s) ==
                  Catch::Approx(eval_energy(fg, x)).margin(1e-9));
        }
    }
}

TEST_CASE("bounded auxiliaries become integral once the edges are integral") {
    // Theorem-(b) behaviour: with integral edge values, the row system pins
    // every auxiliary to its product value even with s only in [0,1].
    splitmix64 rng(23);
    factor_graph fg;
    fg.num_variables = 4;
    fg.label_counts = {4, 4, 4, 4};
    fg.mode = graph_mode::unsupervised;
    factor f;
    f.vars = {0, 1, 2, 3};
    f.kind = factor_kind::lpi;
    f.values.assign(15, 0.0);
    fg.factors.push_back(f);
    auto inst = build_multicut(fg);

    for (const auto& part : enumerate_partitions(4)) {
        labeling x(part.rgs.begin(), part.rgs.end());
        auto p = induce_point(inst, x);
        for (int k = 0; k < inst.num_aux_vars(); ++k) {
            double lo =
                extreme_value(inst, inst.fixed_rows, p.y, inst.num_edge_vars() + k, false);
            double hi = extreme_value(inst, inst.fixed_rows, p.y, inst.num_edge_vars() + k, true);
            CHECK(lo == Catch::Approx(p.s[static_cast<std::size_t>(k)]).margin(1e-9));
            CHECK(hi == Catch::Approx(p.s[static_cast<std::size_t>(k)]).margin(1e-9));
        }
    }
    (void)rng;
}

TEST_CASE("build_multicut rejects non-invariant higher-order tables") {
    factor_graph fg;
    fg.num_variables = 2;
    fg.label_counts = {2, 2};
    fg.mode = graph_mode::supervised;
    factor f;
    f.vars = {0, 1};
    f.kind = factor_kind::table;
    f.values = {0, 1, 2, 3};
    fg.factors.push_back(f);
    CHECK_THROWS_AS(build_multicut(fg), model_error);
}
