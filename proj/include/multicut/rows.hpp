#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "multicut/errors.hpp"

namespace multicut {

enum class row_sense : std::uint8_t { le, ge, eq };

enum class row_class : std::uint8_t {
    initial,
    terminal_fixed,
    cycle,
    terminal_triangle,
    multi_terminal,
    odd_wheel,
    reduction_a,
    reduction_b,
    sum_to_one,
};

inline const char* row_class_name(row_class c) {
    switch (c) {
    case row_class::initial: return "initial";
    case row_class::terminal_fixed: return "terminal-fixed";
    case row_class::cycle: return "cycle";
    case row_class::terminal_triangle: return "terminal-triangle";
    case row_class::multi_terminal: return "multi-terminal";
    case row_class::odd_wheel: return "odd-wheel";
    case row_class::reduction_a: return "reduction-a";
    case row_class::reduction_b: return "reduction-b";
    case row_class::sum_to_one: return "sum-to-one";
    }
    return "unknown";
}

/// Sparse linear inequality/equality over variable indices.
struct constraint_row {
    std::vector<std::pair<int, double>> terms; // sorted by index, no zeros
    row_sense sense = row_sense::le;
    double rhs = 0.0;
    row_class tag = row_class::initial;

    /// Sort terms, merge duplicate indices, drop zero coefficients.
    void normalize() {
        std::sort(terms.begin(), terms.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms.size();) {
            int var = terms[i].first;
            double sum = 0.0;
            while (i < terms.size() && terms[i].first == var) sum += terms[i++].second;
            if (sum != 0.0) terms[out++] = {var, sum};
        }
        terms.resize(out);
    }

    double activity(const std::vector<double>& x) const {
        double a = 0.0;
        for (const auto& [v, c] : terms) a += c * x[static_cast<std::size_t>(v)];
        return a;
    }

    /// Amount by which x violates the row (0 when satisfied).
    double violation(const std::vector<double>& x) const {
        double a = activity(x);
        switch (sense) {
        case row_sense::le: return std::max(0.0, a - rhs);
        case row_sense::ge: return std::max(0.0, rhs - a);
        case row_sense::eq: return std::abs(a - rhs);
        }
        return 0.0;
    }
};

inline constraint_row make_row(std::vector<std::pair<int, double>> terms, row_sense sense,
                               double rhs, row_class tag) {
    constraint_row r;
    r.terms = std::move(terms);
    r.sense = sense;
    r.rhs = rhs;
    r.tag = tag;
    r.normalize();
    return r;
}

} // namespace multicut
