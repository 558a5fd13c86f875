#pragma once

// The cutting-plane driver: build the multicut instance, seed the row pool
// with the fixed rows, then per schedule stage run the accumulated separator
// set to quiescence over LP (or, after the integer switch, ILP) solves.
// Separation procedures introduced once stay active for every later stage.

#include <array>
#include <chrono>
#include <cstring>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "multicut/errors.hpp"
#include "multicut/model.hpp"
#include "multicut/reduction.hpp"
#include "multicut/rounding.hpp"
#include "multicut/separation.hpp"
#include "multicut/simplex.hpp"

namespace multicut {

constexpr double optimality_gap = 1e-6; // value - bound below this certifies

enum class solve_status : std::uint8_t { verified_optimal, feasible, bound_only };

inline const char* solve_status_name(solve_status s) {
    switch (s) {
    case solve_status::verified_optimal: return "verified-optimal";
    case solve_status::feasible: return "feasible";
    case solve_status::bound_only: return "bound-only";
    }
    return "unknown";
}

enum class rounding_mode : std::uint8_t { nearest, derandomized, pseudo, components };

struct engine_options {
    // rounding; the default picks pseudo-derandomized for supervised models
    // and a kappa sweep over {0,0.05,...,0.5} for unsupervised ones
    bool rounding_set = false;
    rounding_mode rounding = rounding_mode::pseudo;
    double kappa = 0.25;
    bool kappa_sweep = true;
    double time_limit_sec = std::numeric_limits<double>::infinity();
    bool lazy_callback = true; // vet integral candidates inside branch and bound
    bool purge_slack_rows = true;
    long long iteration_cap = 100000;
    std::string export_lp_path;
};

struct stage_stats {
    std::string token;
    std::array<int, 9> rows_added{};
    int lp_solves = 0;
    long long ilp_nodes = 0;
    double bound_after = 0.0;
    double wall_ms = 0.0;

    int rows_total() const {
        int t = 0;
        for (int c : rows_added) t += c;
        return t;
    }
};

struct solve_result {
    double value = std::numeric_limits<double>::infinity();
    double bound = -std::numeric_limits<double>::infinity();
    labeling best_labeling;
    std::vector<double> y; // final edge values, clamped to [0,1]
    solve_status status = solve_status::feasible;
    std::vector<stage_stats> stages;
    double runtime_ms = 0.0;
    double constant_offset = 0.0;
    bool hit_time_limit = false;
    // final state kept for inspection and the LP export
    std::shared_ptr<multicut_instance> instance;
    std::shared_ptr<linear_program> lp;
};

inline std::pair<double, double> lower_and_upper(const solve_result& r) {
    return {r.bound, r.value};
}

namespace detail {

struct row_registry {
    std::unordered_map<std::string, int> ids;

    static std::string key_of(const constraint_row& r) {
        std::string key;
        key.reserve(r.terms.size() * 12 + 10);
        auto put = [&key](const void* p, std::size_t n) {
            key.append(static_cast<const char*>(p), n);
        };
        for (const auto& [v, c] : r.terms) {
            put(&v, sizeof(v));
            put(&c, sizeof(c));
        }
        char sense = static_cast<char>(r.sense);
        put(&sense, 1);
        put(&r.rhs, sizeof(r.rhs));
        return key;
    }
};

} // namespace detail

class cutting_plane_engine {
public:
    cutting_plane_engine(const factor_graph& fg, schedule sched, engine_options opts)
        : fg_(fg), sched_(std::move(sched)), opts_(std::move(opts)) {
        if (sched_.needs_terminals() && fg.mode != graph_mode::supervised)
            throw usage_error("schedule uses terminal separation but the model has no terminals");
    }

    solve_result run() {
        auto t_start = clock_now();
        deadline_ = opts_.time_limit_sec == std::numeric_limits<double>::infinity()
                        ? std::chrono::steady_clock::time_point::max()
                        : t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double>(opts_.time_limit_sec));

        inst_ = std::make_shared<multicut_instance>(build_multicut(fg_));
        lp_ = std::make_shared<linear_program>(make_linear_program(*inst_));
        for (int r = 0; r < lp_->num_rows(); ++r)
            registry_.ids.emplace(detail::row_registry::key_of(lp_->rows[static_cast<std::size_t>(r)]), r);
        for (int e = 0; e < inst_->num_edge_vars(); ++e) integer_vars_.push_back(e);
        for (int k = 0; k < inst_->num_aux_vars(); ++k)
            if (inst_->aux_vars[static_cast<std::size_t>(k)].integral)
                integer_vars_.push_back(inst_->num_edge_vars() + k);

        solver_ = std::make_unique<simplex_solver>(*lp_);

        solve_result out;
        out.constant_offset = inst_->constant_offset;
        out.instance = inst_;
        out.lp = lp_;

        bool integer_mode = false;
        std::vector<schedule_stage> accumulated;
        long long iterations = 0;

        for (const schedule_stage& stage : sched_.stages) {
            auto t_stage = clock_now();
            stage_stats stats;
            stats.token = stage.token;
            if (stage.kind == stage_kind::integer_switch)
                integer_mode = true;
            else
                accumulated.push_back(stage);

            for (;;) {
                if (++iterations > opts_.iteration_cap)
                    throw internal_error("cutting-plane iteration cap exceeded");
                bool solved = integer_mode ? solve_ilp_pass(stats, accumulated)
                                           : solve_lp_pass(stats);
                if (!solved) { // time limit
                    out.hit_time_limit = true;
                    break;
                }
                int added = separate_and_add(accumulated, stats);
                if (added == 0) break;
                if (clock_now() > deadline_) {
                    out.hit_time_limit = true;
                    break;
                }
            }
            best_bound_ = std::max(best_bound_, current_objective_);
            stats.bound_after = best_bound_;
            stats.wall_ms = millis_since(t_stage);
            out.stages.push_back(stats);
            consider_rounding();
            if (out.hit_time_limit) break;
            if (opts_.purge_slack_rows && !integer_mode) purge_rows();
        }

        consider_rounding();
        out.bound = best_bound_;
        out.value = best_value_;
        out.best_labeling = best_labeling_;
        out.y = current_y_;
        if (best_labeling_.empty())
            out.status = solve_status::bound_only;
        else
            out.status = (out.value - out.bound < optimality_gap) ? solve_status::verified_optimal
                                                                  : solve_status::feasible;
        out.runtime_ms = millis_since(t_start);
        if (!opts_.export_lp_path.empty())
            write_lp_file(*lp_, opts_.export_lp_path, &integer_vars_);
        return out;
    }

private:
    static std::chrono::steady_clock::time_point clock_now() {
        return std::chrono::steady_clock::now();
    }
    static double millis_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock_now() - t0).count();
    }

    // one LP solve; false when out of time
    bool solve_lp_pass(stage_stats& stats) {
        if (clock_now() > deadline_) return false;
        solver_->sync_rows();
        lp_status st = solver_->reoptimize();
        ++stats.lp_solves;
        if (st == lp_status::infeasible)
            throw internal_error("relaxation became infeasible; contradictory rows");
        current_objective_ = solver_->objective();
        capture_y();
        return true;
    }

    bool solve_ilp_pass(stage_stats& stats, const std::vector<schedule_stage>& accumulated) {
        if (clock_now() > deadline_) return false;
        // warm incumbent: the best labeling found so far induces a feasible
        // integral point for any valid row set
        ilp_options io;
        io.deadline = deadline_;
        std::vector<double> start;
        if (!best_labeling_.empty()) {
            auto p = induce_point(*inst_, best_labeling_);
            start = std::move(p.y);
            start.insert(start.end(), p.s.begin(), p.s.end());
            io.start_values = &start;
            io.start_objective = best_value_;
        }
        if (opts_.lazy_callback) {
            io.callback = [this, &accumulated, &stats](const std::vector<double>& x) {
                return separate_point(accumulated, x, &stats);
            };
        }
        solver_->sync_rows();
        lp_basis warm = solver_->save_basis();
        int pool_before = lp_->num_rows();
        auto sol = solve_ilp(*lp_, integer_vars_, &io, &warm);
        // rows the callback supplied were appended by the solver; record ids
        for (int r = pool_before; r < lp_->num_rows(); ++r)
            registry_.ids[detail::row_registry::key_of(lp_->rows[static_cast<std::size_t>(r)])] = r;
        stats.lp_solves += 1;
        stats.ilp_nodes += io.nodes_explored;
        if (io.hit_deadline) return false;
        if (sol.status == lp_status::infeasible)
            throw internal_error("integer relaxation became infeasible; contradictory rows");
        current_objective_ = sol.objective_value;
        current_y_.assign(sol.values.begin(),
                          sol.values.begin() + inst_->num_edge_vars());
        for (double& v : current_y_) v = detail::clamp01(v);
        return true;
    }

    void capture_y() {
        current_y_.resize(static_cast<std::size_t>(inst_->num_edge_vars()));
        for (int e = 0; e < inst_->num_edge_vars(); ++e)
            current_y_[static_cast<std::size_t>(e)] = detail::clamp01(solver_->value(e));
    }

    // run the accumulated separators at x (edge part), returning fresh rows
    std::vector<constraint_row> separate_point(const std::vector<schedule_stage>& accumulated,
                                               const std::vector<double>& x, stage_stats* stats) {
        std::vector<double> y(x.begin(), x.begin() + inst_->num_edge_vars());
        for (double& v : y) v = detail::clamp01(v);
        std::vector<constraint_row> fresh;
        for (const schedule_stage& st : accumulated) {
            separation_report rep;
            switch (st.kind) {
            case stage_kind::cycles:
                rep = separate_cycles(*inst_, y, st.cyc);
                break;
            case stage_kind::terminal:
            case stage_kind::terminal_integer:
                rep = separate_terminal_triangles(*inst_, y);
                break;
            case stage_kind::multi_terminal:
                rep = separate_multiterminal(*inst_, y);
                break;
            case stage_kind::odd_wheel:
                rep = separate_odd_wheels(*inst_, y);
                break;
            case stage_kind::integer_switch:
                continue;
            }
            for (constraint_row& row : rep.rows) {
                std::string key = detail::row_registry::key_of(row);
                auto it = registry_.ids.find(key);
                if (it != registry_.ids.end()) {
                    if (it->second < 0) continue; // already queued this batch
                    // reactivate if it was purged; an active hit means the
                    // violation is within solver tolerance noise
                    if (!lp_->row_active[static_cast<std::size_t>(it->second)]) {
                        lp_->set_row_active(it->second, true);
                        if (stats != nullptr)
                            ++stats->rows_added[static_cast<std::size_t>(row.tag)];
                        fresh.push_back(row);
                    }
                    continue;
                }
                if (stats != nullptr) ++stats->rows_added[static_cast<std::size_t>(row.tag)];
                fresh.push_back(row);
                registry_.ids.emplace(std::move(key), -1); // id assigned on pool append
            }
        }
        return fresh;
    }

    int separate_and_add(const std::vector<schedule_stage>& accumulated, stage_stats& stats) {
        std::vector<double> x = current_y_;
        auto fresh = separate_point(accumulated, x, &stats);
        int added = 0;
        for (constraint_row& row : fresh) {
            std::string key = detail::row_registry::key_of(row);
            auto it = registry_.ids.find(key);
            if (it != registry_.ids.end() && it->second >= 0) {
                ++added; // reactivated in separate_point
                continue;
            }
            int id = lp_->add_row(std::move(row), true);
            registry_.ids[key] = id;
            ++added;
        }
        return added;
    }

    void purge_rows() {
        // drop strictly slack separation rows whose slack variable is basic;
        // the optimum is unchanged and the separators can re-derive them
        for (int r = 0; r < lp_->num_rows(); ++r) {
            if (!lp_->row_active[static_cast<std::size_t>(r)]) continue;
            const constraint_row& row = lp_->rows[static_cast<std::size_t>(r)];
            if (row.tag != row_class::cycle && row.tag != row_class::terminal_triangle &&
                row.tag != row_class::multi_terminal)
                continue;
            if (!solver_->slack_is_basic(r)) continue;
            double act = solver_->row_activity(r);
            double slack = row.sense == row_sense::le ? row.rhs - act : act - row.rhs;
            if (slack > 1e-6) lp_->set_row_active(r, false);
        }
        solver_->sync_rows();
    }

    void consider_rounding() {
        if (current_y_.empty()) return;
        labeling x = apply_rounding(current_y_);
        if (x.empty()) return;
        auto p = induce_point(*inst_, x);
        double value = multicut_cost(*inst_, p.y, p.s);
        if (value < best_value_) {
            best_value_ = value;
            best_labeling_ = std::move(x);
        }
    }

    labeling apply_rounding(const std::vector<double>& y) {
        if (inst_->supervised()) {
            rounding_mode mode = opts_.rounding_set ? opts_.rounding : rounding_mode::pseudo;
            switch (mode) {
            case rounding_mode::nearest:
                return round_nearest(*inst_, y);
            case rounding_mode::derandomized:
                return round_derandomized(*inst_, y, derandomized_thresholds(*inst_, y));
            case rounding_mode::pseudo:
            default:
                return round_derandomized(*inst_, y, pseudo_thresholds());
            }
        }
        // unsupervised: single kappa or sweep, keep the cheapest labeling
        std::vector<double> kappas;
        if (opts_.rounding_set && !opts_.kappa_sweep)
            kappas.push_back(opts_.kappa);
        else if (opts_.kappa_sweep)
            for (double k = 0.0; k <= 0.5001; k += 0.05) kappas.push_back(k);
        else
            kappas.push_back(opts_.kappa);
        labeling best;
        double best_cost = 0.0;
        for (double k : kappas) {
            auto [proj, x] = round_components(*inst_, y, k);
            (void)proj;
            auto p = induce_point(*inst_, x);
            double cost = multicut_cost(*inst_, p.y, p.s);
            if (best.empty() || cost < best_cost) {
                best = std::move(x);
                best_cost = cost;
            }
        }
        return best;
    }

    const factor_graph& fg_;
    schedule sched_;
    engine_options opts_;
    std::shared_ptr<multicut_instance> inst_;
    std::shared_ptr<linear_program> lp_;
    std::unique_ptr<simplex_solver> solver_;
    detail::row_registry registry_;
    std::vector<int> integer_vars_;
    std::vector<double> current_y_;
    double current_objective_ = -std::numeric_limits<double>::infinity();
    double best_bound_ = -std::numeric_limits<double>::infinity();
    double best_value_ = std::numeric_limits<double>::infinity();
    labeling best_labeling_;
    std::chrono::steady_clock::time_point deadline_;
};

inline solve_result solve(const factor_graph& fg, const schedule& sched,
                          engine_options opts = {}) {
    cutting_plane_engine engine(fg, sched, std::move(opts));
    return engine.run();
}

inline solve_result solve(const factor_graph& fg, const std::string& schedule_text,
                          engine_options opts = {}) {
    return solve(fg, parse_schedule(schedule_text), std::move(opts));
}

} // namespace multicut
