#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "multicut/model.hpp"

using namespace multicut;

namespace {

factor_graph unsupervised_graph(int n) {
    factor_graph fg;
    fg.num_variables = n;
    fg.label_counts.assign(static_cast<std::size_t>(n), n);
    fg.mode = graph_mode::unsupervised;
    return fg;
}

factor_graph supervised_graph(int n, int labels) {
    factor_graph fg;
    fg.num_variables = n;
    fg.label_counts.assign(static_cast<std::size_t>(n), labels);
    fg.mode = graph_mode::supervised;
    return fg;
}

} // namespace

TEST_CASE("tau maps label tuples to pairwise cut indicators") {
    CHECK(tau({1, 1, 2}) == std::vector<std::uint8_t>{0, 1, 1});
    CHECK(tau({5, 5, 5}) == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(tau({2, 7, 2}) == std::vector<std::uint8_t>{1, 0, 1});
    // invariant under label permutation
    CHECK(tau({2, 7, 2}) == tau({9, 3, 9}));
    CHECK_THROWS_AS(tau({3}), input_error);
}

TEST_CASE("enumerate_partitions produces the canonical order") {
    auto p3 = enumerate_partitions(3);
    REQUIRE(p3.size() == 5);
    std::vector<std::vector<std::uint8_t>> expect = {
        {0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}, {0, 1, 2}};
    for (std::size_t i = 0; i < 5; ++i) CHECK(p3[i].rgs == expect[i]);

    CHECK(enumerate_partitions(1).size() == 1);
    CHECK(enumerate_partitions(4).size() == 15);
    CHECK_THROWS_AS(enumerate_partitions(11), input_error);
    CHECK_THROWS_AS(enumerate_partitions(0), input_error);
}

TEST_CASE("partition counts match Bell numbers and chi vectors are distinct") {
    const std::vector<std::int64_t> bell = {1, 2, 5, 15, 52, 203, 877, 4140};
    for (int n = 1; n <= 8; ++n) {
        auto parts = enumerate_partitions(n);
        CHECK(static_cast<std::int64_t>(parts.size()) == bell[static_cast<std::size_t>(n - 1)]);
        CHECK(static_cast<std::int64_t>(parts.size()) == bell_number(n));
        std::set<std::vector<std::uint8_t>> chis;
        for (const auto& p : parts) chis.insert(p.chi);
        CHECK(chis.size() == parts.size());
    }
}

TEST_CASE("every tau image equals exactly one partition chi") {
    const int n = 4, labels = 3;
    auto parts = enumerate_partitions(n);
    std::vector<int> x(n, 0);
    int tuples = 0;
    for (x[0] = 0; x[0] < labels; ++x[0])
        for (x[1] = 0; x[1] < labels; ++x[1])
            for (x[2] = 0; x[2] < labels; ++x[2])
                for (x[3] = 0; x[3] < labels; ++x[3]) {
                    auto img = tau(x);
                    int hits = 0;
                    for (const auto& p : parts)
                        if (p.chi == img) ++hits;
                    CHECK(hits == 1);
                    ++tuples;
                }
    CHECK(tuples == 81);
}

TEST_CASE("eval_energy on the basic kinds") {
    SECTION("potts, equal labels") {
        auto fg = supervised_graph(2, 3);
        fg.factors.push_back(make_potts(0, 1, 0.0, 3.0));
        validate(fg);
        CHECK(eval_energy(fg, {0, 0}) == 0.0);
        CHECK(eval_energy(fg, {0, 2}) == 3.0);
    }
    SECTION("lpi weight lookup by partition") {
        auto fg = unsupervised_graph(3);
        factor f;
        f.vars = {0, 1, 2};
        f.kind = factor_kind::lpi;
        f.values = {10, 11, 12, 13, 14}; // canonical order 000,001,010,011,012
        fg.factors.push_back(f);
        validate(fg);
        // x=(0,0,1) has partition {12|3} -> rgs 001 -> second weight
        CHECK(eval_energy(fg, {0, 0, 1}) == 11.0);
        CHECK(eval_energy(fg, {0, 0, 0}) == 10.0);
        CHECK(eval_energy(fg, {0, 1, 0}) == 12.0);
        CHECK(eval_energy(fg, {0, 1, 1}) == 13.0);
        CHECK(eval_energy(fg, {0, 1, 2}) == 14.0);
    }
    SECTION("junction counts distinct labels") {
        auto fg = supervised_graph(4, 3);
        factor f;
        f.vars = {0, 1, 2, 3};
        f.kind = factor_kind::junction;
        f.lambda = 2.0;
        fg.factors.push_back(f);
        validate(fg);
        CHECK(eval_energy(fg, {0, 0, 1, 2}) == 2.0);
        CHECK(eval_energy(fg, {0, 0, 1, 1}) == 0.0);
    }
    SECTION("label out of range is an input error") {
        auto fg = supervised_graph(2, 2);
        fg.factors.push_back(make_potts(0, 1, 0.0, 1.0));
        CHECK_THROWS_AS(eval_energy(fg, {0, 2}), input_error);
    }
}

TEST_CASE("table factor layout: first variable is the slowest index") {
    factor f;
    f.vars = {0, 1};
    f.kind = factor_kind::table;
    f.values = {0, 1, 2, 10, 11, 12}; // f(x0,x1) = 10*x0 + x1
    CHECK(eval_factor_with_cards(f, {0, 2}, {2, 3}) == 2.0);
    CHECK(eval_factor_with_cards(f, {1, 0}, {2, 3}) == 10.0);
    CHECK(eval_factor_with_cards(f, {1, 2}, {2, 3}) == 12.0);
}

TEST_CASE("junction_to_lpi expands onto partitions with three or more blocks") {
    CHECK(junction_to_lpi(0.0) == std::vector<double>(15, 0.0));

    auto w = junction_to_lpi(1.0);
    REQUIRE(w.size() == 15);
    int ones = 0, zeros = 0;
    for (double v : w) (v == 1.0 ? ones : zeros)++;
    CHECK(ones == 7);  // 6 partitions with 3 blocks + 1 with 4 blocks
    CHECK(zeros == 8); // the 8 partitions with at most 2 blocks

    // junction factor and its expanded LPI agree on all 4-tuples over 3 labels
    auto fg_j = supervised_graph(4, 3);
    factor j;
    j.vars = {0, 1, 2, 3};
    j.kind = factor_kind::junction;
    j.lambda = 2.0;
    fg_j.factors.push_back(j);

    auto fg_l = supervised_graph(4, 3);
    factor l;
    l.vars = {0, 1, 2, 3};
    l.kind = factor_kind::lpi;
    l.values = junction_to_lpi(2.0);
    fg_l.factors.push_back(l);

    std::vector<int> x(4, 0);
    for (x[0] = 0; x[0] < 3; ++x[0])
        for (x[1] = 0; x[1] < 3; ++x[1])
            for (x[2] = 0; x[2] < 3; ++x[2])
                for (x[3] = 0; x[3] < 3; ++x[3])
                    CHECK(eval_energy(fg_j, x) == eval_energy(fg_l, x));
}

TEST_CASE("non-table factors are label permutation invariant") {
    // any two labelings with the same tau image evaluate equally
    std::vector<factor> fs;
    factor hop;
    hop.vars = {0, 1, 2, 3};
    hop.kind = factor_kind::hopotts;
    hop.equal = -1.5;
    hop.unequal = 2.5;
    fs.push_back(hop);
    factor lpi;
    lpi.vars = {0, 1, 2, 3};
    lpi.kind = factor_kind::lpi;
    lpi.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    fs.push_back(lpi);
    factor jn;
    jn.vars = {0, 1, 2, 3};
    jn.kind = factor_kind::junction;
    jn.lambda = 0.7;
    fs.push_back(jn);

    std::vector<int> x(4), y(4);
    for (int a = 0; a < 256; ++a) {
        for (int b = 0; b < 256; ++b) {
            for (int k = 0; k < 4; ++k) {
                x[static_cast<std::size_t>(k)] = (a >> (2 * k)) & 3;
                y[static_cast<std::size_t>(k)] = (b >> (2 * k)) & 3;
            }
            if (tau(x) != tau(y)) continue;
            for (const auto& f : fs)
                CHECK(eval_factor(f, x) == eval_factor(f, y));
        }
    }
}

TEST_CASE("eval_energy is additive over factor subsets") {
    auto fg = unsupervised_graph(4);
    factor f1 = make_potts(0, 1, 0.5, -2.0);
    factor f2 = make_potts(1, 2, 0.0, 3.0);
    factor f3;
    f3.vars = {0, 1, 2, 3};
    f3.kind = factor_kind::hopotts;
    f3.equal = 1.0;
    f3.unequal = -1.0;

    auto fg_a = fg, fg_b = fg, fg_all = fg;
    fg_a.factors = {f1, f2};
    fg_b.factors = {f3};
    fg_all.factors = {f1, f2, f3};

    for (labeling x : {labeling{0, 0, 0, 0}, labeling{0, 1, 2, 3}, labeling{0, 0, 1, 1},
                       labeling{1, 1, 1, 0}})
        CHECK(eval_energy(fg_all, x) ==
              Catch::Approx(eval_energy(fg_a, x) + eval_energy(fg_b, x)));
}

TEST_CASE("validate rejects malformed graphs") {
    SECTION("unsupervised with first-order factor") {
        auto fg = unsupervised_graph(2);
        fg.factors.push_back(make_unary(0, {1.0, 2.0}));
        CHECK_THROWS_AS(validate(fg), model_error);
    }
    SECTION("unsorted scope") {
        auto fg = supervised_graph(3, 2);
        factor f = make_potts(0, 1, 0, 1);
        f.vars = {1, 0};
        fg.factors.push_back(f);
        CHECK_THROWS_AS(validate(fg), model_error);
    }
    SECTION("wrong lpi weight count") {
        auto fg = unsupervised_graph(3);
        factor f;
        f.vars = {0, 1, 2};
        f.kind = factor_kind::lpi;
        f.values = {1, 2, 3};
        fg.factors.push_back(f);
        CHECK_THROWS_AS(validate(fg), model_error);
    }
    SECTION("supervised with non-uniform labels") {
        factor_graph fg;
        fg.num_variables = 2;
        fg.label_counts = {2, 3};
        fg.mode = graph_mode::supervised;
        CHECK_THROWS_AS(validate(fg), model_error);
    }
}
