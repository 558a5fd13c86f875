#pragma once

// Self-contained LP/ILP kernel: bounded-variable revised simplex driven by
// the dual method (cold starts are dual-feasible by construction, row
// additions and bound changes preserve dual feasibility, so one method
// covers cold solves, reoptimization and branch-and-bound nodes alike).
// The basis is kept as a sparse LU factorization with product-form updates
// and periodic refactorization.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "multicut/errors.hpp"
#include "multicut/rows.hpp"

namespace multicut {

constexpr double lp_feas_tol = 1e-9;   // primal/dual feasibility
constexpr double lp_pivot_tol = 1e-11; // smallest acceptable pivot
constexpr double ilp_gap_tol = 1e-9;   // absolute incumbent pruning gap
constexpr double ilp_int_tol = 1e-7;   // integrality recognition

enum class lp_status : std::uint8_t { optimal, infeasible };

struct linear_program {
    std::vector<double> obj;
    std::vector<double> lo, hi;
    double obj_constant = 0.0;
    std::vector<constraint_row> rows;
    std::vector<std::uint8_t> row_active;

    int num_vars() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    int add_variable(double cost, double lower, double upper) {
        if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
            throw input_error("add_variable: bounds must be finite with lo <= hi");
        obj.push_back(cost);
        lo.push_back(lower);
        hi.push_back(upper);
        return num_vars() - 1;
    }

    int add_row(constraint_row r, bool active = true) {
        r.normalize();
        for (const auto& [v, c] : r.terms) {
            (void)c;
            if (v < 0 || v >= num_vars()) throw input_error("add_row: variable index out of range");
        }
        rows.push_back(std::move(r));
        row_active.push_back(active ? 1 : 0);
        return num_rows() - 1;
    }

    void set_row_active(int r, bool active) {
        row_active[static_cast<std::size_t>(r)] = active ? 1 : 0;
    }
};

/// Opaque warm-start token: the active rows at capture, the basic variable
/// per active row, and the bound each nonbasic structural variable sat at.
struct lp_basis {
    std::vector<int> active_rows;
    std::vector<int> basic;
    std::vector<std::uint8_t> struct_at_upper;
    bool valid = false;
};

struct lp_solution {
    lp_status status = lp_status::infeasible;
    std::vector<double> values; // structural variables, clamped to bounds
    double objective_value = 0.0;
    lp_basis basis;
};

namespace detail {

// Sparse LU with partial pivoting. Columns are given over row positions
// 0..m-1; unit columns are pivoted first, the rest by ascending fill-in
// potential (column count).
class basis_lu {
public:
    struct entry {
        int row;
        double val;
    };

    bool factorize(int m, const std::vector<std::vector<entry>>& cols) {
        m_ = m;
        pivot_row_.assign(static_cast<std::size_t>(m), -1);
        row_pos_.assign(static_cast<std::size_t>(m), -1);
        col_order_.resize(static_cast<std::size_t>(m));
        pos_of_col_.assign(static_cast<std::size_t>(m), -1);
        lcols_.assign(static_cast<std::size_t>(m), {});
        ucols_.assign(static_cast<std::size_t>(m), {});
        udiag_.assign(static_cast<std::size_t>(m), 0.0);

        // column processing order: singletons first, then by nnz
        std::vector<int> order(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return cols[static_cast<std::size_t>(a)].size() < cols[static_cast<std::size_t>(b)].size();
        });

        std::vector<double> work(static_cast<std::size_t>(m), 0.0);
        std::vector<int> touched;
        touched.reserve(64);

        for (int k = 0; k < m; ++k) {
            int c = order[static_cast<std::size_t>(k)];
            col_order_[static_cast<std::size_t>(k)] = c;
            pos_of_col_[static_cast<std::size_t>(c)] = k;

            touched.clear();
            for (const entry& e : cols[static_cast<std::size_t>(c)]) {
                work[static_cast<std::size_t>(e.row)] = e.val;
                touched.push_back(e.row);
            }
            // forward substitution against previously pivoted columns
            auto& ucol = ucols_[static_cast<std::size_t>(k)];
            for (int j = 0; j < k; ++j) {
                int pr = pivot_row_[static_cast<std::size_t>(j)];
                double u = work[static_cast<std::size_t>(pr)];
                if (u == 0.0) continue;
                ucol.push_back({j, u});
                for (const entry& e : lcols_[static_cast<std::size_t>(j)]) {
                    if (work[static_cast<std::size_t>(e.row)] == 0.0)
                        touched.push_back(e.row);
                    work[static_cast<std::size_t>(e.row)] -= u * e.val;
                }
                work[static_cast<std::size_t>(pr)] = 0.0;
            }
            // pivot: largest remaining magnitude, ties -> lowest row id
            int prow = -1;
            double pval = 0.0;
            for (int r : touched) {
                if (row_pos_[static_cast<std::size_t>(r)] >= 0) continue;
                double v = work[static_cast<std::size_t>(r)];
                if (std::abs(v) > std::abs(pval) + 0.0 ||
                    (std::abs(v) == std::abs(pval) && pval != 0.0 && r < prow)) {
                    if (v != 0.0) {
                        pval = v;
                        prow = r;
                    }
                }
            }
            if (prow < 0 || std::abs(pval) < lp_pivot_tol) {
                for (int r : touched) work[static_cast<std::size_t>(r)] = 0.0;
                return false; // singular
            }
            pivot_row_[static_cast<std::size_t>(k)] = prow;
            row_pos_[static_cast<std::size_t>(prow)] = k;
            udiag_[static_cast<std::size_t>(k)] = pval;
            auto& lcol = lcols_[static_cast<std::size_t>(k)];
            for (int r : touched) {
                double v = work[static_cast<std::size_t>(r)];
                work[static_cast<std::size_t>(r)] = 0.0;
                if (r == prow || v == 0.0) continue;
                if (row_pos_[static_cast<std::size_t>(r)] >= 0) continue; // already eliminated
                lcol.push_back({r, v / pval});
            }
        }
        return true;
    }

    int size() const { return m_; }

    // solve B z = x in place; x indexed by row position on entry,
    // by basis position on exit
    void ftran(std::vector<double>& x, std::vector<double>& scratch) const {
        // forward: v = L^{-1} P x, kept in raw-row slots
        for (int j = 0; j < m_; ++j) {
            int pr = pivot_row_[static_cast<std::size_t>(j)];
            double v = x[static_cast<std::size_t>(pr)];
            if (v == 0.0) continue;
            for (const entry& e : lcols_[static_cast<std::size_t>(j)])
                x[static_cast<std::size_t>(e.row)] -= v * e.val;
        }
        // backward: solve U t = v, t by elimination step
        std::vector<double>& t = scratch;
        t.assign(static_cast<std::size_t>(m_), 0.0);
        for (int k = m_ - 1; k >= 0; --k) {
            int pr = pivot_row_[static_cast<std::size_t>(k)];
            double v = x[static_cast<std::size_t>(pr)] / udiag_[static_cast<std::size_t>(k)];
            t[static_cast<std::size_t>(k)] = v;
            x[static_cast<std::size_t>(pr)] = 0.0;
            if (v == 0.0) continue;
            for (const entry& e : ucols_[static_cast<std::size_t>(k)])
                x[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(e.row)])] -=
                    v * e.val;
        }
        // scatter to basis positions
        for (int k = 0; k < m_; ++k)
            x[static_cast<std::size_t>(col_order_[static_cast<std::size_t>(k)])] =
                t[static_cast<std::size_t>(k)];
    }

    // solve B^T y = x in place; x indexed by basis position on entry,
    // by row position on exit
    void btran(std::vector<double>& x, std::vector<double>& scratch) const {
        std::vector<double>& s = scratch;
        s.assign(static_cast<std::size_t>(m_), 0.0);
        // gather by elimination step
        for (int k = 0; k < m_; ++k) {
            s[static_cast<std::size_t>(k)] =
                x[static_cast<std::size_t>(col_order_[static_cast<std::size_t>(k)])];
            x[static_cast<std::size_t>(col_order_[static_cast<std::size_t>(k)])] = 0.0;
        }
        // solve U^T s' = s (forward over elimination steps)
        for (int k = 0; k < m_; ++k) {
            double acc = s[static_cast<std::size_t>(k)];
            for (const entry& e : ucols_[static_cast<std::size_t>(k)])
                acc -= e.val * s[static_cast<std::size_t>(e.row)];
            s[static_cast<std::size_t>(k)] = acc / udiag_[static_cast<std::size_t>(k)];
        }
        // solve L^T w = s' (backward), then scatter by pivot rows
        for (int k = m_ - 1; k >= 0; --k) {
            double acc = s[static_cast<std::size_t>(k)];
            for (const entry& e : lcols_[static_cast<std::size_t>(k)])
                acc -= e.val * s[static_cast<std::size_t>(row_pos_[static_cast<std::size_t>(e.row)])];
            s[static_cast<std::size_t>(k)] = acc;
        }
        for (int k = 0; k < m_; ++k)
            x[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(k)])] =
                s[static_cast<std::size_t>(k)];
    }

private:
    int m_ = 0;
    std::vector<int> pivot_row_;  // elimination step -> row position
    std::vector<int> row_pos_;    // row position -> elimination step
    std::vector<int> col_order_;  // elimination step -> basis position
    std::vector<int> pos_of_col_; // basis position -> elimination step
    std::vector<std::vector<entry>> lcols_; // multipliers, raw row ids
    std::vector<std::vector<entry>> ucols_; // above-diagonal, elimination ids
    std::vector<double> udiag_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// simplex_solver: persistent solver state bound to one linear_program
// ---------------------------------------------------------------------------

class simplex_solver {
    static constexpr std::uint8_t at_lower = 0;
    static constexpr std::uint8_t at_upper = 1;
    static constexpr std::uint8_t basic = 2;

public:
    explicit simplex_solver(linear_program& lp) : lp_(lp) {
        n_ = lp.num_vars();
        var_lo_ = lp.lo;
        var_hi_ = lp.hi;
        sync_rows();
        reset_basis();
    }

    /// Pick up rows activated in the pool since the last sync; their slacks
    /// enter the basis, which preserves both primal values of old basics and
    /// dual feasibility.
    void sync_rows() {
        for (int r = 0; r < lp_.num_rows(); ++r) {
            if (!lp_.row_active[static_cast<std::size_t>(r)]) continue;
            if (static_cast<std::size_t>(r) < row_position_.size() &&
                row_position_[static_cast<std::size_t>(r)] >= 0)
                continue;
            if (static_cast<std::size_t>(r) >= row_position_.size())
                row_position_.resize(static_cast<std::size_t>(r) + 1, -1);
            row_position_[static_cast<std::size_t>(r)] = static_cast<int>(active_rows_.size());
            active_rows_.push_back(r);
            if (in_basis_.empty()) continue; // before first reset
            basis_.push_back(slack_var(r));
            grow_var_arrays();
            status_[static_cast<std::size_t>(slack_var(r))] = basic;
            factorized_ = false;
        }
        // handle deactivated rows: only droppable when their slack is basic
        for (std::size_t p = 0; p < active_rows_.size();) {
            int r = active_rows_[p];
            if (lp_.row_active[static_cast<std::size_t>(r)]) {
                ++p;
                continue;
            }
            int sv = slack_var(r);
            if (!in_basis_.empty() && status_[static_cast<std::size_t>(sv)] != basic) {
                // cannot cheaply drop a tight row; fall back to a fresh basis
                active_rows_.erase(active_rows_.begin() + static_cast<std::ptrdiff_t>(p));
                row_position_[static_cast<std::size_t>(r)] = -1;
                renumber_rows();
                reset_basis();
                return;
            }
            active_rows_.erase(active_rows_.begin() + static_cast<std::ptrdiff_t>(p));
            row_position_[static_cast<std::size_t>(r)] = -1;
            if (!in_basis_.empty()) {
                auto it = std::find(basis_.begin(), basis_.end(), sv);
                if (it != basis_.end()) basis_.erase(it);
                status_[static_cast<std::size_t>(sv)] = at_lower;
                factorized_ = false;
            }
        }
        renumber_rows();
    }

    void set_var_bounds(int v, double lower, double upper) {
        var_lo_[static_cast<std::size_t>(v)] = lower;
        var_hi_[static_cast<std::size_t>(v)] = upper;
        primal_dirty_ = true;
    }

    void reset_var_bounds() {
        var_lo_ = lp_.lo;
        var_hi_ = lp_.hi;
        primal_dirty_ = true;
    }

    double var_lo(int v) const { return var_lo_[static_cast<std::size_t>(v)]; }
    double var_hi(int v) const { return var_hi_[static_cast<std::size_t>(v)]; }

    /// All-slack basis with structurals at their cost-preferred bound;
    /// dual feasible by construction.
    void reset_basis() {
        const int m = static_cast<int>(active_rows_.size());
        grow_var_arrays();
        basis_.assign(static_cast<std::size_t>(m), 0);
        std::fill(status_.begin(), status_.end(), at_lower);
        for (int j = 0; j < n_; ++j)
            status_[static_cast<std::size_t>(j)] =
                lp_.obj[static_cast<std::size_t>(j)] < 0.0 ? at_upper : at_lower;
        for (int p = 0; p < m; ++p) {
            int sv = slack_var(active_rows_[static_cast<std::size_t>(p)]);
            basis_[static_cast<std::size_t>(p)] = sv;
            status_[static_cast<std::size_t>(sv)] = basic;
        }
        in_basis_.assign(1, 1); // mark initialized
        factorized_ = false;
        primal_dirty_ = true;
    }

    bool load_basis(const lp_basis& b) {
        if (!b.valid) return false;
        if (static_cast<int>(b.struct_at_upper.size()) != n_) return false;
        // every token row must still be active
        for (int r : b.active_rows) {
            if (r >= lp_.num_rows() || !lp_.row_active[static_cast<std::size_t>(r)]) return false;
        }
        grow_var_arrays();
        std::fill(status_.begin(), status_.end(), at_lower);
        for (int j = 0; j < n_; ++j)
            status_[static_cast<std::size_t>(j)] =
                b.struct_at_upper[static_cast<std::size_t>(j)] ? at_upper : at_lower;
        const int m = static_cast<int>(active_rows_.size());
        basis_.assign(static_cast<std::size_t>(m), -1);
        // map token rows to current positions
        for (std::size_t k = 0; k < b.active_rows.size(); ++k) {
            int pos = row_position_[static_cast<std::size_t>(b.active_rows[k])];
            if (pos < 0) return false;
            int var = b.basic[k];
            if (var < 0 || var >= n_ + lp_.num_rows()) return false;
            basis_[static_cast<std::size_t>(pos)] = var;
        }
        for (int p = 0; p < m; ++p) {
            if (basis_[static_cast<std::size_t>(p)] < 0)
                basis_[static_cast<std::size_t>(p)] = slack_var(active_rows_[static_cast<std::size_t>(p)]);
        }
        // rebuild statuses of basics; detect duplicates
        for (int p = 0; p < m; ++p) {
            int var = basis_[static_cast<std::size_t>(p)];
            if (status_[static_cast<std::size_t>(var)] == basic) return false;
            status_[static_cast<std::size_t>(var)] = basic;
        }
        // nonbasic slacks sit at their finite bound (0), flagged by sense
        for (int r : active_rows_) {
            int sv = slack_var(r);
            if (status_[static_cast<std::size_t>(sv)] == basic) continue;
            status_[static_cast<std::size_t>(sv)] =
                lp_.rows[static_cast<std::size_t>(r)].sense == row_sense::ge ? at_upper : at_lower;
        }
        in_basis_.assign(1, 1);
        factorized_ = false;
        primal_dirty_ = true;
        return true;
    }

    lp_basis save_basis() const {
        lp_basis b;
        b.active_rows = active_rows_;
        b.basic.resize(active_rows_.size());
        for (std::size_t p = 0; p < active_rows_.size(); ++p) b.basic[p] = basis_[p];
        b.struct_at_upper.resize(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j)
            b.struct_at_upper[static_cast<std::size_t>(j)] =
                status_[static_cast<std::size_t>(j)] == at_upper ? 1 : 0;
        b.valid = true;
        return b;
    }

    /// Dual simplex to optimality from the current (dual feasible) basis.
    lp_status reoptimize() {
        if (!factorize_or_reset()) throw internal_error("simplex: singular basis after reset");
        compute_duals();
        compute_primal();
        long long stall = 0;
        bool bland = false;
        const long long iter_cap = 2000000;
        for (long long iter = 0; iter < iter_cap; ++iter) {
            int p = pick_leaving(bland);
            if (p < 0) {
                finish();
                return lp_status::optimal;
            }
            if (!price_row(p)) { // BTRAN + alpha row
                refactor_now();
                if (!price_row(p)) throw internal_error("simplex: pricing failed");
            }
            int q = pick_entering(p, bland);
            if (q < 0) {
                clear_alpha();
                return lp_status::infeasible;
            }
            double before = dual_obj_proxy_;
            pivot(p, q);
            if (dual_obj_proxy_ <= before + 1e-13) {
                if (++stall > 2000) bland = true;
            } else {
                stall = 0;
                bland = false;
            }
            if (static_cast<int>(etas_.size()) >= refactor_interval_) refactor_now();
        }
        throw internal_error("simplex: iteration cap exceeded");
    }

    double objective() const {
        double v = lp_.obj_constant;
        for (int j = 0; j < n_; ++j)
            v += lp_.obj[static_cast<std::size_t>(j)] * xval_[static_cast<std::size_t>(j)];
        return v;
    }

    double value(int v) const {
        return std::clamp(xval_[static_cast<std::size_t>(v)], var_lo_[static_cast<std::size_t>(v)],
                          var_hi_[static_cast<std::size_t>(v)]);
    }

    std::vector<double> values() const {
        std::vector<double> out(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] = value(j);
        return out;
    }

    bool slack_is_basic(int pool_row) const {
        return status_[static_cast<std::size_t>(slack_var(pool_row))] == basic;
    }

    double row_activity(int pool_row) const {
        double a = 0.0;
        for (const auto& [v, c] : lp_.rows[static_cast<std::size_t>(pool_row)].terms)
            a += c * xval_[static_cast<std::size_t>(v)];
        return a;
    }

    int num_active_rows() const { return static_cast<int>(active_rows_.size()); }

private:
    int slack_var(int pool_row) const { return n_ + pool_row; }

    void grow_var_arrays() {
        std::size_t total = static_cast<std::size_t>(n_ + lp_.num_rows());
        if (status_.size() < total) status_.resize(total, at_lower);
        if (xval_.size() < total) xval_.resize(total, 0.0);
        if (dj_.size() < total) dj_.resize(total, 0.0);
        if (alpha_.size() < total) alpha_.resize(total, 0.0);
    }

    void renumber_rows() {
        for (std::size_t p = 0; p < active_rows_.size(); ++p)
            row_position_[static_cast<std::size_t>(active_rows_[p])] = static_cast<int>(p);
    }

    // bounds of any variable (slack bounds derived from the row sense)
    double lo_of(int var) const {
        if (var < n_) return var_lo_[static_cast<std::size_t>(var)];
        const auto& row = lp_.rows[static_cast<std::size_t>(var - n_)];
        return row.sense == row_sense::ge ? -std::numeric_limits<double>::infinity() : 0.0;
    }
    double hi_of(int var) const {
        if (var < n_) return var_hi_[static_cast<std::size_t>(var)];
        const auto& row = lp_.rows[static_cast<std::size_t>(var - n_)];
        return row.sense == row_sense::le ? std::numeric_limits<double>::infinity() : 0.0;
    }
    double cost_of(int var) const {
        return var < n_ ? lp_.obj[static_cast<std::size_t>(var)] : 0.0;
    }

    // column of a variable over row positions
    void gather_column(int var, std::vector<detail::basis_lu::entry>& out) const {
        out.clear();
        if (var >= n_) {
            int pos = row_position_[static_cast<std::size_t>(var - n_)];
            out.push_back({pos, 1.0});
            return;
        }
        for (std::size_t k = col_start_[static_cast<std::size_t>(var)];
             k < col_start_[static_cast<std::size_t>(var) + 1]; ++k)
            out.push_back({col_rows_[k].first, col_rows_[k].second});
    }

    void build_columns() {
        // CSC over structural variables for the current active rows
        std::vector<int> count(static_cast<std::size_t>(n_) + 1, 0);
        for (std::size_t p = 0; p < active_rows_.size(); ++p)
            for (const auto& [v, c] : lp_.rows[static_cast<std::size_t>(active_rows_[p])].terms) {
                (void)c;
                ++count[static_cast<std::size_t>(v) + 1];
            }
        col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (int j = 0; j < n_; ++j)
            col_start_[static_cast<std::size_t>(j) + 1] =
                col_start_[static_cast<std::size_t>(j)] + count[static_cast<std::size_t>(j) + 1];
        col_rows_.assign(static_cast<std::size_t>(col_start_[static_cast<std::size_t>(n_)]), {});
        std::vector<int> fill(static_cast<std::size_t>(n_), 0);
        for (std::size_t p = 0; p < active_rows_.size(); ++p)
            for (const auto& [v, c] : lp_.rows[static_cast<std::size_t>(active_rows_[p])].terms) {
                std::size_t slot = col_start_[static_cast<std::size_t>(v)] +
                                   static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++);
                col_rows_[slot] = {static_cast<int>(p), c};
            }
        columns_built_for_ = active_rows_.size();
    }

    bool factorize_basis() {
        const int m = static_cast<int>(active_rows_.size());
        if (columns_built_for_ != active_rows_.size()) build_columns();
        std::vector<std::vector<detail::basis_lu::entry>> cols(static_cast<std::size_t>(m));
        for (int p = 0; p < m; ++p) gather_column(basis_[static_cast<std::size_t>(p)], cols[static_cast<std::size_t>(p)]);
        etas_.clear();
        if (!lu_.factorize(m, cols)) return false;
        factorized_ = true;
        return true;
    }

    bool factorize_or_reset() {
        if (factorized_ && etas_.empty()) return true;
        if (factorize_basis()) return true;
        reset_basis();
        return factorize_basis();
    }

    void refactor_now() {
        if (!factorize_basis()) {
            reset_basis();
            if (!factorize_basis()) throw internal_error("simplex: singular slack basis");
        }
        compute_duals();
        compute_primal();
    }

    struct eta {
        int pos;
        std::vector<detail::basis_lu::entry> z; // sparse FTRAN'd column
        double zp;
    };

    void ftran(std::vector<double>& x) {
        lu_.ftran(x, scratch_);
        for (const eta& e : etas_) {
            double t = x[static_cast<std::size_t>(e.pos)] / e.zp;
            x[static_cast<std::size_t>(e.pos)] = t;
            if (t == 0.0) continue;
            for (const auto& en : e.z)
                if (en.row != e.pos) x[static_cast<std::size_t>(en.row)] -= en.val * t;
        }
    }

    void btran(std::vector<double>& x) {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = 0.0;
            for (const auto& en : it->z)
                if (en.row != it->pos) s += en.val * x[static_cast<std::size_t>(en.row)];
            x[static_cast<std::size_t>(it->pos)] =
                (x[static_cast<std::size_t>(it->pos)] - s) / it->zp;
        }
        lu_.btran(x, scratch_);
    }

    void compute_primal() {
        const int m = static_cast<int>(active_rows_.size());
        // nonbasic values at their bounds (slack finite bound is always 0)
        for (int j = 0; j < n_ + lp_.num_rows(); ++j) {
            if (status_[static_cast<std::size_t>(j)] == basic) continue;
            double v = 0.0;
            if (j < n_)
                v = status_[static_cast<std::size_t>(j)] == at_upper ? hi_of(j) : lo_of(j);
            xval_[static_cast<std::size_t>(j)] = v;
        }
        // rhs minus nonbasic activity
        std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
        for (int p = 0; p < m; ++p)
            rhs[static_cast<std::size_t>(p)] = lp_.rows[static_cast<std::size_t>(active_rows_[static_cast<std::size_t>(p)])].rhs;
        for (int p = 0; p < m; ++p) {
            const auto& row = lp_.rows[static_cast<std::size_t>(active_rows_[static_cast<std::size_t>(p)])];
            for (const auto& [v, c] : row.terms)
                if (status_[static_cast<std::size_t>(v)] != basic)
                    rhs[static_cast<std::size_t>(p)] -= c * xval_[static_cast<std::size_t>(v)];
            int sv = slack_var(active_rows_[static_cast<std::size_t>(p)]);
            if (status_[static_cast<std::size_t>(sv)] != basic)
                rhs[static_cast<std::size_t>(p)] -= xval_[static_cast<std::size_t>(sv)];
        }
        ftran(rhs);
        for (int p = 0; p < m; ++p)
            xval_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] =
                rhs[static_cast<std::size_t>(p)];
        primal_dirty_ = false;
    }

    void compute_duals() {
        const int m = static_cast<int>(active_rows_.size());
        std::vector<double> y(static_cast<std::size_t>(m), 0.0);
        for (int p = 0; p < m; ++p)
            y[static_cast<std::size_t>(p)] = cost_of(basis_[static_cast<std::size_t>(p)]);
        btran(y);
        std::fill(dj_.begin(), dj_.end(), 0.0);
        for (int j = 0; j < n_; ++j) dj_[static_cast<std::size_t>(j)] = lp_.obj[static_cast<std::size_t>(j)];
        for (int p = 0; p < m; ++p) {
            double yp = y[static_cast<std::size_t>(p)];
            if (yp == 0.0) continue;
            const auto& row = lp_.rows[static_cast<std::size_t>(active_rows_[static_cast<std::size_t>(p)])];
            for (const auto& [v, c] : row.terms) dj_[static_cast<std::size_t>(v)] -= yp * c;
            dj_[static_cast<std::size_t>(slack_var(active_rows_[static_cast<std::size_t>(p)]))] = -yp;
        }
        for (int p = 0; p < m; ++p) dj_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] = 0.0;
        dual_obj_proxy_ = 0.0;
    }

    int pick_leaving(bool bland) {
        const int m = static_cast<int>(active_rows_.size());
        if (primal_dirty_) compute_primal();
        int best = -1;
        double best_viol = lp_feas_tol;
        for (int p = 0; p < m; ++p) {
            int var = basis_[static_cast<std::size_t>(p)];
            double x = xval_[static_cast<std::size_t>(var)];
            double viol = std::max(lo_of(var) - x, x - hi_of(var));
            if (viol <= best_viol) continue;
            if (bland) {
                if (best < 0 || var < basis_[static_cast<std::size_t>(best)]) best = p;
                // keep best_viol threshold only
            } else {
                best_viol = viol;
                best = p;
            }
        }
        return best;
    }

    // compute alpha row for basis position p; false on numerical trouble
    bool price_row(int p) {
        const int m = static_cast<int>(active_rows_.size());
        rho_.assign(static_cast<std::size_t>(m), 0.0);
        rho_[static_cast<std::size_t>(p)] = 1.0;
        btran(rho_);
        clear_alpha();
        for (int pos = 0; pos < m; ++pos) {
            double y = rho_[static_cast<std::size_t>(pos)];
            if (y == 0.0) continue;
            int r = active_rows_[static_cast<std::size_t>(pos)];
            const auto& row = lp_.rows[static_cast<std::size_t>(r)];
            for (const auto& [v, c] : row.terms) {
                if (alpha_[static_cast<std::size_t>(v)] == 0.0) alpha_touched_.push_back(v);
                alpha_[static_cast<std::size_t>(v)] += y * c;
            }
            int sv = slack_var(r);
            if (alpha_[static_cast<std::size_t>(sv)] == 0.0) alpha_touched_.push_back(sv);
            alpha_[static_cast<std::size_t>(sv)] += y;
        }
        return std::abs(alpha_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(p)])] - 1.0) < 1e-6;
    }

    void clear_alpha() {
        for (int v : alpha_touched_) alpha_[static_cast<std::size_t>(v)] = 0.0;
        alpha_touched_.clear();
    }

    int pick_entering(int p, bool bland) {
        int leaving = basis_[static_cast<std::size_t>(p)];
        double x = xval_[static_cast<std::size_t>(leaving)];
        double sigma = (x < lo_of(leaving)) ? +1.0 : -1.0; // +1: leaving rises to lo
        int best = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        double best_alpha = 0.0;
        for (int v : alpha_touched_) {
            if (status_[static_cast<std::size_t>(v)] == basic) continue;
            if (lo_of(v) == hi_of(v)) continue; // fixed, cannot move
            double a = alpha_[static_cast<std::size_t>(v)];
            if (std::abs(a) < lp_pivot_tol) continue;
            bool lower = status_[static_cast<std::size_t>(v)] == at_lower;
            // at-lower may increase: needs sigma*a < 0; at-upper mirrored
            if (lower && sigma * a >= 0.0) continue;
            if (!lower && sigma * a <= 0.0) continue;
            double ratio = std::abs(dj_[static_cast<std::size_t>(v)]) / std::abs(a);
            if (bland) {
                if (best < 0 || v < best) {
                    best = v;
                    best_ratio = ratio;
                    best_alpha = a;
                }
                continue;
            }
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 &&
                 (std::abs(a) > std::abs(best_alpha) + 1e-12 ||
                  (std::abs(a) >= std::abs(best_alpha) - 1e-12 && best >= 0 && v < best)))) {
                best = v;
                best_ratio = ratio;
                best_alpha = a;
            }
        }
        return best;
    }

    void pivot(int p, int q) {
        int leaving = basis_[static_cast<std::size_t>(p)];
        double x_leave = xval_[static_cast<std::size_t>(leaving)];
        double target = (x_leave < lo_of(leaving)) ? lo_of(leaving) : hi_of(leaving);

        // FTRAN entering column
        const int m = static_cast<int>(active_rows_.size());
        zcol_.assign(static_cast<std::size_t>(m), 0.0);
        if (q >= n_) {
            zcol_[static_cast<std::size_t>(row_position_[static_cast<std::size_t>(q - n_)])] = 1.0;
        } else {
            for (std::size_t k = col_start_[static_cast<std::size_t>(q)];
                 k < col_start_[static_cast<std::size_t>(q) + 1]; ++k)
                zcol_[static_cast<std::size_t>(col_rows_[k].first)] = col_rows_[k].second;
        }
        ftran(zcol_);
        double zp = zcol_[static_cast<std::size_t>(p)];
        if (std::abs(zp) < lp_pivot_tol) {
            // numerically invalid pivot; refactor and let the caller retry
            clear_alpha();
            refactor_now();
            return;
        }

        // primal step
        double delta = (x_leave - target) / zp;
        for (int pos = 0; pos < m; ++pos) {
            double z = zcol_[static_cast<std::size_t>(pos)];
            if (z == 0.0) continue;
            int var = basis_[static_cast<std::size_t>(pos)];
            xval_[static_cast<std::size_t>(var)] -= z * delta;
        }
        xval_[static_cast<std::size_t>(q)] += delta;
        xval_[static_cast<std::size_t>(leaving)] = target;

        // dual update: t makes d_q zero
        double t = dj_[static_cast<std::size_t>(q)] / alpha_[static_cast<std::size_t>(q)];
        for (int v : alpha_touched_) {
            if (v == q) continue;
            dj_[static_cast<std::size_t>(v)] -= t * alpha_[static_cast<std::size_t>(v)];
        }
        dj_[static_cast<std::size_t>(q)] = 0.0;
        dj_[static_cast<std::size_t>(leaving)] = -t;
        dual_obj_proxy_ += std::abs((x_leave - target) * t);

        // basis exchange
        basis_[static_cast<std::size_t>(p)] = q;
        status_[static_cast<std::size_t>(q)] = basic;
        status_[static_cast<std::size_t>(leaving)] =
            (target == lo_of(leaving)) ? at_lower : at_upper;

        // eta update
        eta e;
        e.pos = p;
        e.zp = zp;
        for (int pos = 0; pos < m; ++pos) {
            double z = zcol_[static_cast<std::size_t>(pos)];
            if (z != 0.0) e.z.push_back({pos, z});
        }
        etas_.push_back(std::move(e));
        clear_alpha();
    }

    void finish() {
        // snap basics inside tolerance onto their bounds
        for (std::size_t p = 0; p < basis_.size(); ++p) {
            int var = basis_[p];
            double& x = xval_[static_cast<std::size_t>(var)];
            if (x < lo_of(var)) x = lo_of(var);
            if (x > hi_of(var)) x = hi_of(var);
        }
        clear_alpha();
    }

    linear_program& lp_;
    int n_ = 0;
    std::vector<double> var_lo_, var_hi_; // solver-local (branch and bound)
    std::vector<int> active_rows_;        // pool ids in position order
    std::vector<int> row_position_;       // pool id -> position or -1
    std::vector<std::size_t> col_start_;
    std::vector<std::pair<int, double>> col_rows_;
    std::size_t columns_built_for_ = static_cast<std::size_t>(-1);

    std::vector<int> basis_;
    std::vector<std::uint8_t> in_basis_; // non-empty once a basis exists
    std::vector<std::uint8_t> status_;
    std::vector<double> xval_, dj_, alpha_, rho_, zcol_, scratch_;
    std::vector<int> alpha_touched_;

    detail::basis_lu lu_;
    std::vector<eta> etas_;
    bool factorized_ = false;
    bool primal_dirty_ = true;
    double dual_obj_proxy_ = 0.0;
    int refactor_interval_ = 64;
};

// ---------------------------------------------------------------------------
// free-function interface
// ---------------------------------------------------------------------------

inline lp_solution solve_lp(linear_program& lp, const lp_basis* warm = nullptr) {
    simplex_solver solver(lp);
    if (warm == nullptr || !solver.load_basis(*warm)) solver.reset_basis();
    lp_status st = solver.reoptimize();
    lp_solution sol;
    sol.status = st;
    if (st == lp_status::optimal) {
        sol.values = solver.values();
        sol.objective_value = solver.objective();
        sol.basis = solver.save_basis();
    }
    return sol;
}

/// Append rows (activated) and reoptimize from the prior basis.
inline lp_solution add_rows_and_reoptimize(linear_program& lp,
                                           const std::vector<constraint_row>& new_rows,
                                           const lp_solution& prior) {
    for (const constraint_row& r : new_rows) lp.add_row(r, true);
    return solve_lp(lp, prior.status == lp_status::optimal ? &prior.basis : nullptr);
}

// ---------------------------------------------------------------------------
// branch and bound
// ---------------------------------------------------------------------------

using lazy_row_callback = std::function<std::vector<constraint_row>(const std::vector<double>&)>;

struct ilp_options {
    lazy_row_callback callback;                  // may veto integral candidates
    const std::vector<double>* start_values = nullptr; // known feasible integral point
    double start_objective = std::numeric_limits<double>::infinity(); // incl. constant
    std::chrono::steady_clock::time_point deadline{std::chrono::steady_clock::time_point::max()};
    bool hit_deadline = false;
    long long nodes_explored = 0;
};

inline lp_solution solve_ilp(linear_program& lp, const std::vector<int>& integer_vars,
                             ilp_options* opts = nullptr, const lp_basis* warm = nullptr) {
    ilp_options local;
    ilp_options& o = opts ? *opts : local;
    o.hit_deadline = false;
    o.nodes_explored = 0;

    simplex_solver solver(lp);
    if (warm == nullptr || !solver.load_basis(*warm)) solver.reset_basis();

    struct bound_change {
        int var;
        double lo, hi;
    };
    struct node {
        double bound;
        long long id;
        std::vector<bound_change> changes;
        lp_basis basis;
    };
    struct node_cmp {
        bool operator()(const node& a, const node& b) const {
            if (a.bound != b.bound) return a.bound > b.bound; // min-heap on bound
            return a.id > b.id;                               // FIFO among ties
        }
    };

    std::vector<std::uint8_t> is_int(static_cast<std::size_t>(lp.num_vars()), 0);
    for (int v : integer_vars) is_int[static_cast<std::size_t>(v)] = 1;

    double incumbent_value = std::numeric_limits<double>::infinity();
    std::vector<double> incumbent;
    if (o.start_values != nullptr) {
        incumbent = *o.start_values;
        incumbent_value = o.start_objective;
    }

    std::priority_queue<node, std::vector<node>, node_cmp> open;
    long long next_id = 0;
    {
        node root;
        root.bound = -std::numeric_limits<double>::infinity();
        root.id = next_id++;
        open.push(std::move(root));
    }

    auto most_fractional = [&](simplex_solver& s) {
        int best = -1;
        double best_score = ilp_int_tol;
        for (int v : integer_vars) {
            double x = s.value(v);
            double frac = x - std::floor(x);
            double score = std::min(frac, 1.0 - frac);
            if (score > best_score) {
                best_score = score;
                best = v;
            }
        }
        return best;
    };

    bool root_done = false;
    lp_status root_status = lp_status::optimal;
    while (!open.empty()) {
        if (std::chrono::steady_clock::now() > o.deadline) {
            o.hit_deadline = true;
            break;
        }
        node nd = open.top();
        open.pop();
        if (nd.bound >= incumbent_value - ilp_gap_tol) continue;
        ++o.nodes_explored;

        solver.reset_var_bounds();
        for (const bound_change& bc : nd.changes) solver.set_var_bounds(bc.var, bc.lo, bc.hi);
        solver.sync_rows();
        if (!nd.basis.valid || !solver.load_basis(nd.basis)) {
            if (nd.id != 0 || warm == nullptr || !solver.load_basis(*warm)) solver.reset_basis();
        }
        lp_status st = solver.reoptimize();
        if (nd.id == 0) {
            root_done = true;
            root_status = st;
        }
        if (st == lp_status::infeasible) continue;
        // dive with lazy rows until branched, pruned, or accepted
        for (;;) {
            double val = solver.objective();
            if (val >= incumbent_value - ilp_gap_tol) break; // prune
            int branch_var = most_fractional(solver);
            if (branch_var < 0) {
                // integral candidate
                std::vector<double> x = solver.values();
                for (int v : integer_vars)
                    x[static_cast<std::size_t>(v)] = std::round(x[static_cast<std::size_t>(v)]);
                if (o.callback) {
                    auto rows = o.callback(x);
                    if (!rows.empty()) {
                        for (const constraint_row& r : rows) lp.add_row(r, true);
                        solver.sync_rows();
                        st = solver.reoptimize();
                        if (st == lp_status::infeasible) break;
                        continue;
                    }
                }
                double exact = lp.obj_constant;
                for (int j = 0; j < lp.num_vars(); ++j)
                    exact += lp.obj[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
                if (exact < incumbent_value - ilp_gap_tol) {
                    incumbent_value = exact;
                    incumbent = std::move(x);
                }
                break;
            }
            // branch
            double xv = solver.value(branch_var);
            double fl = std::floor(xv), ce = std::ceil(xv);
            lp_basis snap = solver.save_basis();
            node down;
            down.bound = val;
            down.id = next_id++;
            down.changes = nd.changes;
            down.changes.push_back({branch_var, solver.var_lo(branch_var), fl});
            down.basis = snap;
            node up;
            up.bound = val;
            up.id = next_id++;
            up.changes = nd.changes;
            up.changes.push_back({branch_var, ce, solver.var_hi(branch_var)});
            up.basis = std::move(snap);
            open.push(std::move(down));
            open.push(std::move(up));
            break;
        }
    }

    lp_solution sol;
    if (incumbent.empty()) {
        sol.status = lp_status::infeasible;
        if (root_done && root_status == lp_status::infeasible) sol.status = lp_status::infeasible;
        return sol;
    }
    sol.status = lp_status::optimal;
    sol.values = std::move(incumbent);
    sol.objective_value = incumbent_value;
    return sol;
}

// ---------------------------------------------------------------------------
// LP-file export (CPLEX LP text format), debugging aid
// ---------------------------------------------------------------------------

inline void write_lp_file(const linear_program& lp, const std::string& path,
                          const std::vector<int>* integer_vars = nullptr) {
    std::ofstream out(path);
    if (!out) throw input_error("write_lp_file: cannot open " + path);
    out.precision(17);
    out << "\\ exported linear program\n";
    out << "Minimize\n obj:";
    bool first = true;
    for (int j = 0; j < lp.num_vars(); ++j) {
        double c = lp.obj[static_cast<std::size_t>(j)];
        if (c == 0.0) continue;
        out << (c < 0 ? " - " : (first ? " " : " + ")) << std::abs(c) << " x" << j;
        first = false;
    }
    if (first) out << " 0 x0";
    out << "\nSubject To\n";
    for (int r = 0; r < lp.num_rows(); ++r) {
        if (!lp.row_active[static_cast<std::size_t>(r)]) continue;
        const constraint_row& row = lp.rows[static_cast<std::size_t>(r)];
        out << " c" << r << ":";
        bool f = true;
        for (const auto& [v, c] : row.terms) {
            out << (c < 0 ? " - " : (f ? " " : " + ")) << std::abs(c) << " x" << v;
            f = false;
        }
        const char* rel = row.sense == row_sense::le ? "<=" : row.sense == row_sense::ge ? ">=" : "=";
        out << " " << rel << " " << row.rhs << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j)
        out << " " << lp.lo[static_cast<std::size_t>(j)] << " <= x" << j << " <= "
            << lp.hi[static_cast<std::size_t>(j)] << "\n";
    if (integer_vars != nullptr && !integer_vars->empty()) {
        out << "Generals\n";
        for (int v : *integer_vars) out << " x" << v;
        out << "\n";
    }
    out << "End\n";
}

} // namespace multicut
