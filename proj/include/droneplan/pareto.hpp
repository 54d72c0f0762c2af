#ifndef DRONEPLAN_PARETO_HPP
#define DRONEPLAN_PARETO_HPP

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "droneplan/evaluator.hpp"
#include "droneplan/formulation.hpp"
#include "droneplan/instance.hpp"
#include "droneplan/milp/solver.hpp"
#include "droneplan/schedule.hpp"

namespace droneplan {

/// Objective vectors at the three single-objective optima, indexed by
/// Objective. Used to initialize the sweep ranges.
struct PayoffTable {
    std::array<ObjectiveVector, 3> points;

    const ObjectiveVector& at(Objective o) const {
        return points[static_cast<int>(o)];
    }
    /// Optimal value of objective `o` (its value at its own optimum).
    double best(Objective o) const { return value_of(at(o), o); }
    /// Worst value objective `o` takes across the three optima.
    double worst(Objective o) const {
        double w = value_of(points[0], o);
        for (int k = 1; k < 3; ++k) {
            double v = value_of(points[k], o);
            if (o == Objective::REWARD ? v < w : v > w) w = v;
        }
        return w;
    }
};

/// One bound axis of the sweep grid: `steps` evenly spaced values of a
/// bound on `objective`, from min_value to max_value inclusive.
struct EpsilonAxis {
    Objective objective = Objective::UNSUCCESSFUL;
    double min_value = 0.0;
    double max_value = 0.0;
    int steps = 1;
};

/// Cartesian sweep grid: bound axes over the non-primary objectives.
struct EpsilonGrid {
    Objective primary = Objective::COST;
    std::vector<EpsilonAxis> axes;  // 0 to 2 axes, objectives distinct from primary
};

/// One grid cell result. The objective vector and schedule are present
/// only when the solve produced a point (optimal, or a limit hit with an
/// incumbent).
struct ParetoPoint {
    std::array<std::optional<double>, 3> eps;  // bound per objective, by enum index
    milp::SolveStatus status = milp::SolveStatus::INFEASIBLE;
    bool has_point = false;
    ObjectiveVector objectives;
    Schedule schedule;
};

/// Solves the three single-objective problems (no bounds) and tabulates
/// each optimum's full objective vector, recomputed from the decoded
/// schedule. Throws std::runtime_error when any of the solves fails to
/// reach optimality.
inline PayoffTable payoff_table(const Instance& inst,
                                const milp::SolverParams& params = {}) {
    PayoffTable table;
    milp::SolverParams run = params;
    if (!run.polish) run.polish = make_schedule_polish(inst);
    for (int k = 0; k < 3; ++k) {
        ObjectiveSelection sel;
        sel.primary = static_cast<Objective>(k);
        milp::MILPModel model = build_milp(inst, sel);
        milp::SolveResult res = milp::solve_mip(model, run);
        if (res.status != milp::SolveStatus::OPTIMAL)
            throw std::runtime_error(std::string("payoff solve for ") +
                                     to_string(sel.primary) + " ended " +
                                     milp::to_string(res.status));
        Schedule sched = decode_schedule(inst, res.values);
        table.points[k] = evaluate_schedule(inst, sched);
    }
    return table;
}

/// Builds the default sweep grid for `primary`: one axis per non-primary
/// objective in enum order, ranged between the payoff-table best and worst
/// values of that objective.
inline EpsilonGrid default_grid(const PayoffTable& table, Objective primary,
                                int steps_first = 20, int steps_second = 20) {
    EpsilonGrid grid;
    grid.primary = primary;
    std::array<int, 2> steps{steps_first, steps_second};
    int axis = 0;
    for (int k = 0; k < 3; ++k) {
        Objective o = static_cast<Objective>(k);
        if (o == primary) continue;
        double lo = table.best(o), hi = table.worst(o);
        if (o == Objective::REWARD) std::swap(lo, hi);  // best reward is the largest
        grid.axes.push_back({o, lo, hi, steps[axis]});
        ++axis;
    }
    return grid;
}

namespace detail {

/// Values of one axis, ascending. A single-step axis degenerates to its
/// loosest bound: the max for upper-bounded objectives, the min for the
/// reward lower bound.
inline std::vector<double> axis_values(const EpsilonAxis& axis) {
    if (axis.steps < 1) throw std::invalid_argument("axis steps must be >= 1");
    if (!(axis.min_value <= axis.max_value))
        throw std::invalid_argument("axis range must satisfy min <= max");
    if (axis.steps == 1)
        return {axis.objective == Objective::REWARD ? axis.min_value : axis.max_value};
    std::vector<double> values(axis.steps);
    for (int t = 0; t < axis.steps; ++t)
        values[t] = axis.min_value +
                    t * (axis.max_value - axis.min_value) / (axis.steps - 1);
    return values;
}

inline void apply_bound(ObjectiveSelection& sel, Objective o, double value) {
    switch (o) {
        case Objective::COST: sel.max_cost = value; break;
        case Objective::UNSUCCESSFUL: sel.max_unsuccessful_pct = value; break;
        case Objective::REWARD: sel.min_reward = value; break;
    }
}

}  // namespace detail

/// Sweeps the full Cartesian grid, one MILP solve per cell. Infeasible
/// cells are kept and flagged. Output order is ascending in the first
/// axis' bound, then the second's; deterministic for fixed inputs.
inline std::vector<ParetoPoint> scan(const Instance& inst, const EpsilonGrid& grid,
                                     const milp::SolverParams& params = {}) {
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        if (grid.axes[a].objective == grid.primary)
            throw std::invalid_argument("grid axis repeats the primary objective");
        for (std::size_t b = a + 1; b < grid.axes.size(); ++b)
            if (grid.axes[a].objective == grid.axes[b].objective)
                throw std::invalid_argument("grid axes repeat an objective");
        if (!std::isfinite(grid.axes[a].min_value) ||
            !std::isfinite(grid.axes[a].max_value))
            throw std::invalid_argument("grid ranges must be finite");
    }

    std::vector<std::vector<double>> values;
    for (const auto& axis : grid.axes) values.push_back(detail::axis_values(axis));

    milp::SolverParams run = params;
    if (!run.polish) run.polish = make_schedule_polish(inst);
    std::vector<ParetoPoint> points;
    std::vector<std::size_t> pick(grid.axes.size(), 0);
    while (true) {
        ObjectiveSelection sel;
        sel.primary = grid.primary;
        ParetoPoint point;
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            double v = values[a][pick[a]];
            detail::apply_bound(sel, grid.axes[a].objective, v);
            point.eps[static_cast<int>(grid.axes[a].objective)] = v;
        }
        milp::MILPModel model = build_milp(inst, sel);
        milp::SolveResult res = milp::solve_mip(model, run);
        point.status = res.status;
        if (res.has_solution()) {
            point.schedule = decode_schedule(inst, res.values);
            point.objectives = evaluate_schedule(inst, point.schedule);
            point.has_point = true;
        }
        points.push_back(std::move(point));

        // Odometer with the last axis fastest, so output stays sorted by
        // (first axis, second axis).
        if (pick.empty()) break;
        std::size_t a = pick.size();
        while (a > 0 && ++pick[a - 1] == values[a - 1].size()) pick[--a] = 0;
        if (a == 0) break;
    }
    return points;
}

/// True when `a` dominates `b`: at least as good in every objective
/// (cost and unsuccessful minimized, reward maximized), strictly better
/// in one.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool ge = a.total_cost <= b.total_cost && a.unsuccessful_pct <= b.unsuccessful_pct &&
              a.reward >= b.reward;
    bool strict = a.total_cost < b.total_cost || a.unsuccessful_pct < b.unsuccessful_pct ||
                  a.reward > b.reward;
    return ge && strict;
}

/// Keeps the points that carry an objective vector and are not dominated
/// by any other; duplicates of a vector collapse to the first occurrence.
/// Stable order; idempotent.
inline std::vector<ParetoPoint> filter_nondominated(const std::vector<ParetoPoint>& points) {
    std::vector<ParetoPoint> kept;
    for (const auto& p : points) {
        if (!p.has_point) continue;
        bool drop = false;
        for (const auto& q : points) {
            if (!q.has_point) continue;
            if (dominates(q.objectives, p.objectives)) {
                drop = true;
                break;
            }
        }
        for (const auto& k : kept) {
            if (drop) break;
            drop = k.objectives.total_cost == p.objectives.total_cost &&
                   k.objectives.unsuccessful_pct == p.objectives.unsuccessful_pct &&
                   k.objectives.reward == p.objectives.reward;
        }
        if (!drop) kept.push_back(p);
    }
    return kept;
}

}  // namespace droneplan

#endif  // DRONEPLAN_PARETO_HPP
