#ifndef DRONEPLAN_MILP_SOLVER_HPP
#define DRONEPLAN_MILP_SOLVER_HPP

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "droneplan/milp/model.hpp"
#include "droneplan/milp/simplex.hpp"

namespace droneplan::milp {

namespace detail {

inline void require_valid(const MILPModel& model) {
    auto violations = model.validate();
    if (!violations.empty()) {
        std::string msg = "invalid model:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }
}

inline long primal_iteration_cap(const MILPModel& m) {
    return 50000 + 50L * (m.num_constraints() + m.num_variables());
}

// Warm-started node re-solves normally finish in tens of pivots; one that
// needs thousands is stalling on degeneracy, and a cold primal restart is
// cheaper than letting it grind.
inline long dual_iteration_cap(const MILPModel& m) {
    return 1000 + 2L * (m.num_constraints() + m.num_variables());
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Solves the linear relaxation (integrality markers ignored).
inline SolveResult solve_lp(const MILPModel& model, const SolverParams& params = {}) {
    detail::require_valid(model);
    detail::Stopwatch clock;
    detail::SimplexEngine engine(model);

    engine.reset_to_slack_basis();
    detail::LpStatus st = engine.solve_primal(params, detail::primal_iteration_cap(model));

    SolveResult res;
    res.iterations = engine.iterations();
    res.wall_seconds = clock.seconds();
    switch (st) {
        case detail::LpStatus::OPTIMAL: {
            res.status = SolveStatus::OPTIMAL;
            double sign = engine.original_sign();
            res.objective = sign * engine.objective_normalized() + model.objective_constant;
            res.best_bound = res.objective;
            engine.structural_values(res.values);
            std::vector<double> y;
            engine.row_duals(y);
            res.row_duals.resize(y.size());
            for (std::size_t r = 0; r < y.size(); ++r) res.row_duals[r] = sign * y[r];
            break;
        }
        case detail::LpStatus::INFEASIBLE: res.status = SolveStatus::INFEASIBLE; break;
        case detail::LpStatus::UNBOUNDED: res.status = SolveStatus::UNBOUNDED; break;
        case detail::LpStatus::ITER_LIMIT: res.status = SolveStatus::TIME_LIMIT; break;
    }
    return res;
}

namespace detail {

struct BBNode {
    long id = 0;
    int parent = -1;     // index into the node arena, -1 for root children
    int col = -1;        // branched column
    double lower = 0.0;  // absolute bounds of `col` in this subtree
    double upper = 0.0;
    double bound = 0.0;  // parent LP objective: a valid subtree bound
    double parent_frac = 0.0;
    bool is_down = false;  // keeps the floor side of the branched fraction
};

struct NodeOrder {
    bool operator()(const std::pair<double, long>& a,
                    const std::pair<double, long>& b) const {
        if (a.first != b.first) return a.first > b.first;  // smaller bound first
        return a.second > b.second;                        // then first-created
    }
};

/// Rounds near-integral entries of integer columns in place, clamped to
/// the model bounds so an incumbent never leaves the feasible box.
inline void round_integers(const MILPModel& model, const std::vector<int>& int_cols,
                           std::vector<double>& x) {
    for (int j : int_cols) {
        double v = std::round(x[j]);
        v = std::min(std::max(v, model.variables[j].lower), model.variables[j].upper);
        x[j] = v;
    }
}

inline bool rounded_point_feasible(const MILPModel& model, const std::vector<double>& x) {
    for (const auto& c : model.constraints) {
        double act = 0.0;
        double scale = std::abs(c.rhs);
        for (const auto& t : c.terms) {
            act += t.coef * x[t.var];
            scale = std::max(scale, std::abs(t.coef * x[t.var]));
        }
        double tol = 1e-6 * (1.0 + scale);
        switch (c.relation) {
            case Relation::LESS_EQUAL:
                if (act > c.rhs + tol) return false;
                break;
            case Relation::GREATER_EQUAL:
                if (act < c.rhs - tol) return false;
                break;
            case Relation::EQUAL:
                if (std::abs(act - c.rhs) > tol) return false;
                break;
        }
    }
    for (std::size_t j = 0; j < model.variables.size(); ++j) {
        const auto& v = model.variables[j];
        double tol = 1e-6 * (1.0 + std::abs(x[j]));
        if (x[j] < v.lower - tol || x[j] > v.upper + tol) return false;
    }
    return true;
}

}  // namespace detail

/// Branch and bound with warm-started dual simplex re-solves. Node
/// selection is best-bound with depth-first plunging until the first
/// incumbent; branching picks the most fractional integer column by
/// default. Deterministic: identical inputs give identical status,
/// objective and node count.
inline SolveResult solve_mip(const MILPModel& model, const SolverParams& params = {}) {
    detail::require_valid(model);
    detail::Stopwatch clock;

    std::vector<int> int_cols;
    for (int j = 0; j < model.num_variables(); ++j)
        if (model.variables[j].kind != VarKind::CONTINUOUS) int_cols.push_back(j);

    detail::SimplexEngine engine(model);
    const double sign = engine.original_sign();
    const long dual_cap = detail::dual_iteration_cap(model);

    SolveResult res;
    auto finish = [&](SolveStatus status, bool has_incumbent, double inc_norm,
                      const std::vector<double>& inc_values, double bound_norm,
                      long nodes) {
        res.status = status;
        res.nodes = nodes;
        res.iterations = engine.iterations();
        res.wall_seconds = clock.seconds();
        res.best_bound = sign * bound_norm + model.objective_constant;
        if (has_incumbent) {
            res.objective = sign * inc_norm + model.objective_constant;
            res.values = inc_values;
        }
        return res;
    };

    // Root relaxation. The primal from the slack basis beats a dual start
    // here: there is no basis worth warming from, and the dual grinds on
    // the degenerate corners these models open with.
    engine.reset_to_slack_basis();
    detail::LpStatus root = engine.solve_primal(params, detail::primal_iteration_cap(model));
    if (root == detail::LpStatus::INFEASIBLE)
        return finish(SolveStatus::INFEASIBLE, false, 0.0, {}, kInfinity, 1);
    if (root == detail::LpStatus::UNBOUNDED)
        return finish(SolveStatus::UNBOUNDED, false, 0.0, {}, -kInfinity, 1);
    if (root == detail::LpStatus::ITER_LIMIT)
        return finish(SolveStatus::TIME_LIMIT, false, 0.0, {}, -kInfinity, 1);

    // Branch-and-bound state. All objectives below live in the
    // minimization-normalized space.
    std::deque<detail::BBNode> arena;
    std::priority_queue<std::pair<double, long>, std::vector<std::pair<double, long>>,
                        detail::NodeOrder>
        open;
    std::vector<long> plunge;  // depth-first stack used until the first incumbent

    bool has_incumbent = false;
    double inc_norm = kInfinity;
    std::vector<double> inc_values;

    std::vector<double> root_lower(int_cols.size()), root_upper(int_cols.size());
    for (std::size_t k = 0; k < int_cols.size(); ++k) {
        root_lower[k] = engine.lower_bound(int_cols[k]);
        root_upper[k] = engine.upper_bound(int_cols[k]);
    }
    std::vector<int> col_to_slot(model.num_variables(), -1);
    for (std::size_t k = 0; k < int_cols.size(); ++k) col_to_slot[int_cols[k]] = static_cast<int>(k);

    std::vector<int> col_class(int_cols.size(), 0);
    for (std::size_t k = 0; k < int_cols.size(); ++k)
        if (int_cols[k] < static_cast<int>(model.branch_priority.size()))
            col_class[k] = model.branch_priority[int_cols[k]];

    // Pseudo-cost statistics (only consulted in PSEUDO_COST mode).
    std::vector<double> pc_sum_up(int_cols.size(), 0.0), pc_sum_dn(int_cols.size(), 0.0);
    std::vector<long> pc_cnt_up(int_cols.size(), 0), pc_cnt_dn(int_cols.size(), 0);

    long next_id = 0;
    long nodes_processed = 1;  // root
    std::vector<double> x;
    std::vector<int> stamp(int_cols.size(), -1);
    int epoch = 0;

    auto apply_node_bounds = [&](long node_id) {
        ++epoch;
        for (long cur = node_id; cur >= 0;) {
            const detail::BBNode& nd = arena[static_cast<std::size_t>(cur)];
            int slot = col_to_slot[nd.col];
            if (stamp[slot] != epoch) {
                stamp[slot] = epoch;
                engine.set_bounds(nd.col, nd.lower, nd.upper);
            }
            cur = nd.parent;
        }
        for (std::size_t k = 0; k < int_cols.size(); ++k)
            if (stamp[k] != epoch)
                engine.set_bounds(int_cols[k], root_lower[k], root_upper[k]);
        engine.recompute_basics();
    };

    // Both pickers respect branch_priority: only the lowest class holding a
    // fractional column is eligible, then the in-class score decides.
    auto most_fractional = [&](const std::vector<double>& v, double& out_frac) {
        int best = -1;
        int best_class = std::numeric_limits<int>::max();
        double best_score = params.integrality_tol;
        for (std::size_t k = 0; k < int_cols.size(); ++k) {
            int j = int_cols[k];
            double frac = v[j] - std::floor(v[j]);
            double dist = std::min(frac, 1.0 - frac);
            if (dist <= params.integrality_tol || col_class[k] > best_class) continue;
            if (col_class[k] < best_class) {
                best_class = col_class[k];
                best_score = params.integrality_tol;
                best = -1;
            }
            if (dist > best_score) {
                best_score = dist;
                best = j;
                out_frac = frac;
            }
        }
        return best;
    };

    auto pseudo_cost_pick = [&](const std::vector<double>& v, double& out_frac) {
        int best = -1;
        int best_class = std::numeric_limits<int>::max();
        double best_score = -1.0;
        for (std::size_t k = 0; k < int_cols.size(); ++k) {
            int j = int_cols[k];
            double frac = v[j] - std::floor(v[j]);
            double dist = std::min(frac, 1.0 - frac);
            if (dist <= params.integrality_tol || col_class[k] > best_class) continue;
            if (col_class[k] < best_class) {
                best_class = col_class[k];
                best_score = -1.0;
                best = -1;
            }
            int slot = col_to_slot[j];
            double up = pc_cnt_up[slot] > 0 ? pc_sum_up[slot] / pc_cnt_up[slot] : 1.0;
            double dn = pc_cnt_dn[slot] > 0 ? pc_sum_dn[slot] / pc_cnt_dn[slot] : 1.0;
            double score = std::max(dn * frac, 1e-8) * std::max(up * (1.0 - frac), 1e-8);
            if (score > best_score + 1e-12) {
                best_score = score;
                best = j;
                out_frac = frac;
            }
        }
        return best;
    };

    auto record_pseudo_cost = [&](const detail::BBNode& nd, double child_obj) {
        if (nd.col < 0 || nd.parent_frac <= 0.0) return;
        int slot = col_to_slot[nd.col];
        double deg = std::max(child_obj - nd.bound, 0.0);
        if (nd.is_down) {
            pc_sum_dn[slot] += deg / std::max(nd.parent_frac, 1e-9);
            ++pc_cnt_dn[slot];
        } else {
            pc_sum_up[slot] += deg / std::max(1.0 - nd.parent_frac, 1e-9);
            ++pc_cnt_up[slot];
        }
    };

    // Expands the node whose LP is currently loaded and solved to
    // optimality with objective `obj`; returns the preferred plunge child.
    auto expand = [&](long parent_id, double obj, const std::vector<double>& v) {
        double frac = 0.0;
        int col = params.branching == SolverParams::Branching::PSEUDO_COST
                      ? pseudo_cost_pick(v, frac)
                      : most_fractional(v, frac);
        if (col < 0) return std::pair<long, long>{-1, -1};
        double lo = engine.lower_bound(col);
        double hi = engine.upper_bound(col);
        double floor_v = std::floor(v[col]);

        detail::BBNode down{next_id++, static_cast<int>(parent_id), col, lo, floor_v, obj,
                            frac, true};
        arena.push_back(down);
        long down_id = static_cast<long>(arena.size()) - 1;
        detail::BBNode up{next_id++, static_cast<int>(parent_id), col, floor_v + 1.0, hi, obj,
                          frac, false};
        arena.push_back(up);
        long up_id = static_cast<long>(arena.size()) - 1;

        long first = frac <= 0.5 ? down_id : up_id;
        long second = frac <= 0.5 ? up_id : down_id;
        return std::pair<long, long>{first, second};
    };

    auto gap_closed = [&](double bound_norm) {
        if (!has_incumbent) return false;
        double allowance = params.relative_gap * std::max(1.0, std::abs(inc_norm));
        return inc_norm - bound_norm <= allowance;
    };

    std::vector<double> obj_coef(model.num_variables(), 0.0);
    for (const auto& t : model.objective) obj_coef[t.var] += t.coef;

    auto try_incumbent = [&](std::vector<double>& v) {
        detail::round_integers(model, int_cols, v);
        if (!detail::rounded_point_feasible(model, v)) return false;
        double exact = 0.0;
        for (int j = 0; j < model.num_variables(); ++j)
            if (obj_coef[j] != 0.0) exact += sign * obj_coef[j] * v[j];
        if (!has_incumbent || exact < inc_norm) {
            has_incumbent = true;
            inc_norm = exact;
            inc_values = v;
        }
        return true;
    };

    // Root node handling.
    {
        engine.structural_values(x);
        double obj = engine.objective_normalized();
        double frac_probe = 0.0;
        bool integral =
            (params.branching == SolverParams::Branching::PSEUDO_COST
                 ? pseudo_cost_pick(x, frac_probe)
                 : most_fractional(x, frac_probe)) < 0;
        if (integral) {
            std::vector<double> v = x;
            if (try_incumbent(v))
                return finish(SolveStatus::OPTIMAL, true, inc_norm, inc_values, obj, 1);
        }
        if (params.polish) {
            std::vector<double> pv = x;
            if (params.polish(pv)) {
                try_incumbent(pv);
                if (has_incumbent &&
                    inc_norm - obj <=
                        params.relative_gap * std::max(1.0, std::abs(inc_norm)))
                    return finish(SolveStatus::OPTIMAL, true, inc_norm, inc_values, obj, 1);
            }
        }
        auto [first, second] = expand(-1, obj, x);
        if (first >= 0) {
            plunge.push_back(second);
            plunge.push_back(first);
        } else if (!has_incumbent) {
            // Integral LP point that failed the rounding check: numerically
            // degenerate; report the relaxation value as infeasible-safe.
            return finish(SolveStatus::INFEASIBLE, false, 0.0, {}, obj, 1);
        }
    }

    double global_bound = arena.empty() ? inc_norm : arena.front().bound;

    auto recompute_global_bound = [&]() {
        // The open queue's best entry is a valid global bound; plunge
        // entries inherit their parent bound which is also tracked there.
        double best = has_incumbent ? inc_norm : kInfinity;
        if (!open.empty()) best = std::min(best, open.top().first);
        for (long id : plunge) best = std::min(best, arena[static_cast<std::size_t>(id)].bound);
        return best;
    };

    for (;;) {
        if (params.node_limit > 0 && nodes_processed >= params.node_limit) {
            global_bound = recompute_global_bound();
            return finish(SolveStatus::NODE_LIMIT, has_incumbent, inc_norm, inc_values,
                          global_bound, nodes_processed);
        }
        if (params.time_limit_s > 0 && clock.seconds() > params.time_limit_s) {
            global_bound = recompute_global_bound();
            return finish(SolveStatus::TIME_LIMIT, has_incumbent, inc_norm, inc_values,
                          global_bound, nodes_processed);
        }

        // Dive-first scheduling: a plunge node differs from the basis the
        // engine just solved by a single bound change, so its dual re-solve
        // is nearly free. The queue is consulted only when a dive bottoms
        // out, which is when the warm start would be distant anyway.
        long node_id = -1;
        bool near_basis = false;
        if (!plunge.empty()) {
            node_id = plunge.back();
            plunge.pop_back();
            near_basis = true;
        } else {
            if (open.empty()) break;
            node_id = open.top().second;
            double node_bound = open.top().first;
            open.pop();
            if (has_incumbent &&
                node_bound >=
                    inc_norm - params.relative_gap * std::max(1.0, std::abs(inc_norm)))
                continue;  // cannot improve
        }

        const detail::BBNode& node = arena[static_cast<std::size_t>(node_id)];
        if (has_incumbent &&
            node.bound >= inc_norm - params.relative_gap * std::max(1.0, std::abs(inc_norm)))
            continue;

        apply_node_bounds(node_id);
        long it0 = engine.iterations(), rb0 = engine.inverse_rebuilds();
        detail::LpStatus st = engine.solve_dual(params, dual_cap);
        long itd = engine.iterations() - it0, rbd = engine.inverse_rebuilds() - rb0;
        bool fell_back = false;
        if (st == detail::LpStatus::ITER_LIMIT) {
            fell_back = true;
            engine.reset_to_slack_basis();
            st = engine.solve_primal(params, detail::primal_iteration_cap(model));
            if (st == detail::LpStatus::ITER_LIMIT)
                throw std::runtime_error("simplex iteration limit exhausted inside branch and bound");
        }
        if (std::getenv("DP_LPSTATS"))
            std::fprintf(stderr,
                         "node=%ld dual_iters=%ld dual_rebuilds=%ld fellback=%d total_iters=%ld total_rebuilds=%ld\n",
                         nodes_processed, itd, rbd, fell_back ? 1 : 0,
                         engine.iterations() - it0, engine.inverse_rebuilds() - rb0);
        ++nodes_processed;
        if (st == detail::LpStatus::INFEASIBLE) continue;
        if (st == detail::LpStatus::UNBOUNDED)
            return finish(SolveStatus::UNBOUNDED, false, 0.0, {}, -kInfinity,
                          nodes_processed);

        double obj = engine.objective_normalized();
        record_pseudo_cost(node, obj);
        if (has_incumbent &&
            obj >= inc_norm - params.relative_gap * std::max(1.0, std::abs(inc_norm)))
            continue;

        engine.structural_values(x);
        if (params.polish) {
            double prev = has_incumbent ? inc_norm : kInfinity;
            std::vector<double> pv = x;
            if (params.polish(pv)) {
                try_incumbent(pv);
                // The current node is not on the open list, so the global
                // bound must also cover its own relaxation value.
                if (inc_norm < prev &&
                    gap_closed(std::min(recompute_global_bound(), obj)))
                    break;
            }
        }
        double frac_probe = 0.0;
        int frac_col = params.branching == SolverParams::Branching::PSEUDO_COST
                           ? pseudo_cost_pick(x, frac_probe)
                           : most_fractional(x, frac_probe);
        if (frac_col < 0) {
            std::vector<double> v = x;
            if (try_incumbent(v)) {
                if (gap_closed(recompute_global_bound())) break;
                continue;
            }
            // Rounded point infeasible: branch on the integer column whose
            // value sits farthest from an integer, if any remains.
            double worst = 0.0;
            for (int j : int_cols) {
                double frac = x[j] - std::floor(x[j]);
                double dist = std::min(frac, 1.0 - frac);
                if (dist > worst) worst = dist;
            }
            if (worst <= 0.0) continue;  // exactly integral yet infeasible: dead end
        }
        auto [first, second] = expand(node_id, obj, x);
        if (first < 0) continue;
        if (!has_incumbent) {
            plunge.push_back(second);
            plunge.push_back(first);
        } else {
            open.push({arena[static_cast<std::size_t>(second)].bound, second});
            plunge.push_back(first);
        }
    }

    global_bound = recompute_global_bound();
    if (has_incumbent)
        return finish(SolveStatus::OPTIMAL, true, inc_norm, inc_values, global_bound,
                      nodes_processed);
    return finish(SolveStatus::INFEASIBLE, false, 0.0, {}, kInfinity, nodes_processed);
}

}  // namespace droneplan::milp

#endif  // DRONEPLAN_MILP_SOLVER_HPP
