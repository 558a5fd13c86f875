#include <catch2/catch_amalgamated.hpp>

#include "multicut/reduction.hpp"
#include "multicut/reference.hpp"
#include "multicut/rng.hpp"

using namespace multicut;

namespace {

factor_graph random_supervised_grid(int w, int h, int labels, std::uint64_t seed) {
    splitmix64 rng(seed);
    factor_graph fg;
    fg.num_variables = w * h;
    fg.label_counts.assign(static_cast<std::size_t>(w * h), labels);
    fg.mode = graph_mode::supervised;
    for (int v = 0; v < w * h; ++v) {
        std::vector<double> u(static_cast<std::size_t>(labels));
        for (auto& x : u) x = rng.uniform();
        fg.factors.push_back(make_unary(v, u));
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int v = y * w + x;
            if (x + 1 < w) fg.factors.push_back(make_potts(v, v + 1, 0.0, rng.uniform(-1.0, 1.0)));
            if (y + 1 < h) fg.factors.push_back(make_potts(v, v + w, 0.0, rng.uniform(-1.0, 1.0)));
        }
    return fg;
}

} // namespace

TEST_CASE("brute force on single-variable and tiny models") {
    SECTION("single variable picks the smallest unary") {
        factor_graph fg;
        fg.num_variables = 1;
        fg.label_counts = {3};
        fg.mode = graph_mode::supervised;
        fg.factors.push_back(make_unary(0, {3.0, 1.0, 2.0}));
        auto [x, val] = brute_force_min(fg);
        CHECK(x == labeling{1});
        CHECK(val == Catch::Approx(1.0));
    }
    SECTION("triangle correlation clustering") {
        factor_graph fg;
        fg.num_variables = 3;
        fg.label_counts = {3, 3, 3};
        fg.mode = graph_mode::unsupervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, -1.0));
        fg.factors.push_back(make_potts(1, 2, 0.0, -1.0));
        fg.factors.push_back(make_potts(0, 2, 0.0, 2.0));
        auto [x, val] = brute_force_min(fg);
        CHECK(val == Catch::Approx(-2.0));
        CHECK(x == labeling{0, 1, 0}); // shores {a,c} and {b}
    }
    SECTION("lexicographic tie break") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 2};
        fg.mode = graph_mode::supervised;
        fg.factors.push_back(make_unary(0, {0.0, 1.0}));
        fg.factors.push_back(make_unary(1, {1.0, 0.0}));
        fg.factors.push_back(make_potts(0, 1, 0.0, 1.0));
        // energies: (0,0)=1, (0,1)=1, (1,0)=3, (1,1)=1 -> ties at 1
        auto [x, val] = brute_force_min(fg);
        CHECK(val == Catch::Approx(1.0));
        CHECK(x == labeling{0, 0});
    }
    SECTION("search-space cap refuses huge models") {
        factor_graph fg;
        fg.num_variables = 10;
        fg.label_counts.assign(10, 10);
        fg.mode = graph_mode::supervised;
        CHECK_THROWS_AS(brute_force_min(fg), unsupported_error);

        factor_graph ug;
        ug.num_variables = 11;
        ug.label_counts.assign(11, 11);
        ug.mode = graph_mode::unsupervised;
        CHECK_THROWS_AS(brute_force_min(ug), unsupported_error);
    }
}

TEST_CASE("local polytope LP basics") {
    SECTION("unary-only model: sum of per-variable minima") {
        factor_graph fg;
        fg.num_variables = 3;
        fg.label_counts = {3, 3, 3};
        fg.mode = graph_mode::supervised;
        fg.factors.push_back(make_unary(0, {3.0, 1.0, 2.0}));
        fg.factors.push_back(make_unary(1, {0.5, 1.0, 2.0}));
        fg.factors.push_back(make_unary(2, {3.0, 1.0, -2.0}));
        CHECK(local_polytope_lp(fg) == Catch::Approx(1.0 + 0.5 - 2.0).margin(1e-9));
    }
    SECTION("strong positive coupling: integral optimum 1") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 2};
        fg.mode = graph_mode::supervised;
        fg.factors.push_back(make_unary(0, {0.0, 1.0}));
        fg.factors.push_back(make_unary(1, {1.0, 0.0}));
        fg.factors.push_back(make_potts(0, 1, 0.0, 10.0));
        CHECK(local_polytope_lp(fg) == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("higher-order factors are rejected") {
        factor_graph fg;
        fg.num_variables = 3;
        fg.label_counts = {3, 3, 3};
        fg.mode = graph_mode::supervised;
        factor f;
        f.vars = {0, 1, 2};
        f.kind = factor_kind::hopotts;
        fg.factors.push_back(f);
        CHECK_THROWS_AS(local_polytope_lp(fg), unsupported_error);
    }
    SECTION("unsupervised models are a usage error") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 2};
        fg.mode = graph_mode::unsupervised;
        fg.factors.push_back(make_potts(0, 1, 0.0, 1.0));
        CHECK_THROWS_AS(local_polytope_lp(fg), usage_error);
    }
}

TEST_CASE("relaxation bound: LP below brute force on random grids") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        auto fg = random_supervised_grid(3, 2, 3, seed);
        double lp = local_polytope_lp(fg);
        auto [x, opt] = brute_force_min(fg);
        (void)x;
        CHECK(lp <= opt + 1e-9);
    }
}
