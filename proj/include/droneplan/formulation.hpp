#ifndef DRONEPLAN_FORMULATION_HPP
#define DRONEPLAN_FORMULATION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "droneplan/evaluator.hpp"
#include "droneplan/instance.hpp"
#include "droneplan/milp/model.hpp"
#include "droneplan/schedule.hpp"

namespace droneplan {

/// Primary objective plus optional bounds on the other two. A bound that
/// matches the primary objective is ignored.
struct ObjectiveSelection {
    Objective primary = Objective::COST;
    std::optional<double> max_unsuccessful_pct;
    std::optional<double> min_reward;
    std::optional<double> max_cost;
};

/// Big-M constants of the time and ordering constraints. Zero means
/// "derive the smallest safe value from the instance".
struct FormulationConfig {
    double big_m_order = 0.0;
    double big_m_time = 0.0;
};

/// Column layout of the scheduling MILP. One instance of this struct fixes
/// the meaning of every column index, shared by the builder and the decoder.
///
/// Families (normative dimensions):
///   W[d]          drone used                          B[d,p]   drone departs from depot
///   Y[i,d,p]      customer i served by d from p       U[i,d]   serving order (integer)
///   Z[i]          customer outsourced                 A[i,j,d] order linearization
///   T[p]          depot touched by a transfer         V[i,j,d] successor indicator
///   M[i,p,q]      package of i moved p -> q           Q[i]     serving start time
///   Xb[i,d,w]     lost: drone never took off          F[i,f]   window rank f committed
///   Xa[i,d,w,l]   lost: breakdown before/at i
struct VariableCatalogue {
    int nc = 0, nd = 0, np = 0, nf = 0, nw = 0, nl = 0;
    double big_m_order = 0.0;
    double big_m_time = 0.0;
    int w_base = 0, y_base = 0, z_base = 0, t_base = 0, m_base = 0, b_base = 0,
        u_base = 0, a_base = 0, xb_base = 0, xa_base = 0, f_base = 0, v_base = 0,
        q_base = 0;
    int total = 0;

    int w(int d) const { return w_base + d; }
    int y(int i, int d, int p) const { return y_base + (i * nd + d) * np + p; }
    int z(int i) const { return z_base + i; }
    int t(int p) const { return t_base + p; }
    int m(int i, int p, int q) const {
        return m_base + i * np * (np - 1) + p * (np - 1) + (q < p ? q : q - 1);
    }
    int b(int d, int p) const { return b_base + d * np + p; }
    int u(int i, int d) const { return u_base + i * nd + d; }
    int a(int i, int j, int d) const {
        return a_base + (i * (nc - 1) + (j < i ? j : j - 1)) * nd + d;
    }
    int xb(int i, int d, int w) const { return xb_base + (i * nd + d) * nw + w; }
    int xa(int i, int d, int w, int l) const {
        return xa_base + ((i * nd + d) * nw + w) * nl + l;
    }
    int f(int i, int rank0) const { return f_base + i * nf + rank0; }
    int v(int i, int j, int d) const {
        return v_base + (i * (nc - 1) + (j < i ? j : j - 1)) * nd + d;
    }
    int q(int i) const { return q_base + i; }
};

namespace detail {

inline double auto_big_m_time(const Instance& inst) {
    double horizon = 0.0;
    for (const auto& d : inst.drones) horizon = std::max(horizon, d.shift_end_min);
    double max_serving = 0.0;
    for (const auto& c : inst.customers) {
        max_serving = std::max(max_serving, c.serving_time_min);
        for (const auto& w : c.windows)
            horizon = std::max({horizon, w.start_min, w.end_min});
    }
    double max_trip = 0.0;
    for (int i = 0; i < inst.num_customers(); ++i)
        for (int p = 0; p < inst.num_depots(); ++p)
            for (int d = 0; d < inst.num_drones(); ++d)
                max_trip = std::max(max_trip, inst.round_trip_min(i, p, d));
    return std::max(1.0, horizon + max_trip + max_serving);
}

}  // namespace detail

/// Computes the column layout, deriving big-M defaults where the config
/// leaves them at zero. Throws std::invalid_argument when a user-supplied
/// constant is smaller than the derived safe minimum.
inline VariableCatalogue build_catalogue(const Instance& inst,
                                         const FormulationConfig& config = {}) {
    VariableCatalogue cat;
    cat.nc = inst.num_customers();
    cat.nd = inst.num_drones();
    cat.np = inst.num_depots();
    cat.nf = inst.num_window_ranks();
    cat.nw = static_cast<int>(inst.scenarios.takeoff.size());
    cat.nl = static_cast<int>(inst.scenarios.breakdown.size());

    double auto_order = cat.nc + 1;
    double auto_time = detail::auto_big_m_time(inst);
    if (config.big_m_order != 0.0 && config.big_m_order < auto_order)
        throw std::invalid_argument("big_m_order below the safe minimum " +
                                    std::to_string(auto_order));
    if (config.big_m_time != 0.0 && config.big_m_time < auto_time)
        throw std::invalid_argument("big_m_time below the safe minimum " +
                                    std::to_string(auto_time));
    cat.big_m_order = config.big_m_order == 0.0 ? auto_order : config.big_m_order;
    cat.big_m_time = config.big_m_time == 0.0 ? auto_time : config.big_m_time;

    int n = 0;
    cat.w_base = n;
    n += cat.nd;
    cat.y_base = n;
    n += cat.nc * cat.nd * cat.np;
    cat.z_base = n;
    n += cat.nc;
    cat.t_base = n;
    n += cat.np;
    cat.m_base = n;
    n += cat.nc * cat.np * (cat.np - 1 > 0 ? cat.np - 1 : 0);
    cat.b_base = n;
    n += cat.nd * cat.np;
    cat.u_base = n;
    n += cat.nc * cat.nd;
    cat.a_base = n;
    n += cat.nc * (cat.nc - 1 > 0 ? cat.nc - 1 : 0) * cat.nd;
    cat.xb_base = n;
    n += cat.nc * cat.nd * cat.nw;
    cat.xa_base = n;
    n += cat.nc * cat.nd * cat.nw * cat.nl;
    cat.f_base = n;
    n += cat.nc * cat.nf;
    cat.v_base = n;
    n += cat.nc * (cat.nc - 1 > 0 ? cat.nc - 1 : 0) * cat.nd;
    cat.q_base = n;
    n += cat.nc;
    cat.total = n;
    return cat;
}

/// A linear expression over catalogue columns.
struct LinearExpr {
    std::vector<milp::LinearTerm> terms;
    double constant = 0.0;
};

/// Builds the requested objective as a linear expression over the
/// catalogue columns. COST and UNSUCCESSFUL are minimized, REWARD is
/// maximized by the caller's choice of sense.
inline LinearExpr build_objective(const Instance& inst, Objective which,
                                  const VariableCatalogue& cat) {
    LinearExpr e;
    switch (which) {
        case Objective::COST: {
            for (int d = 0; d < cat.nd; ++d)
                e.terms.push_back({cat.w(d), inst.drones[d].initial_cost});
            for (int p = 0; p < cat.np; ++p)
                e.terms.push_back({cat.t(p), inst.costs.transfer_cost[p]});
            for (int i = 0; i < cat.nc; ++i)
                for (int d = 0; d < cat.nd; ++d)
                    for (int p = 0; p < cat.np; ++p)
                        e.terms.push_back({cat.y(i, d, p),
                                           routing_cost(inst.costs,
                                                        inst.round_trip_km(i, p))});
            for (int i = 0; i < cat.nc; ++i)
                e.terms.push_back({cat.z(i), inst.costs.outsource_cost[i]});
            break;
        }
        case Objective::UNSUCCESSFUL: {
            if (cat.nc == 0) break;
            double scale = 100.0 / cat.nc;
            for (int i = 0; i < cat.nc; ++i)
                for (int d = 0; d < cat.nd; ++d)
                    for (int w = 0; w < cat.nw; ++w) {
                        double pw = inst.scenarios.takeoff[w].probability;
                        e.terms.push_back({cat.xb(i, d, w), scale * pw});
                        for (int l = 0; l < cat.nl; ++l) {
                            double pl = inst.scenarios.breakdown[l].probability;
                            e.terms.push_back({cat.xa(i, d, w, l), scale * pw * pl});
                        }
                    }
            break;
        }
        case Objective::REWARD: {
            for (int i = 0; i < cat.nc; ++i)
                for (int r = 0; r < cat.nf; ++r)
                    e.terms.push_back({cat.f(i, r), inst.costs.window_rewards[r]});
            break;
        }
    }
    return e;
}

namespace detail {

inline const TimeWindow* find_window(const Customer& c, int rank) {
    for (const auto& w : c.windows)
        if (w.rank == rank) return &w;
    return nullptr;
}

}  // namespace detail

/// Assembles the full three-stage scheduling MILP for one objective
/// selection. Deterministic: identical inputs produce identical column and
/// row layouts, names and coefficients.
inline milp::MILPModel build_milp(const Instance& inst, const ObjectiveSelection& sel,
                                  const FormulationConfig& config = {}) {
    {
        auto violations = validate_instance(inst);
        if (!violations.empty())
            throw std::invalid_argument("invalid instance: " + violations.front());
    }
    const VariableCatalogue cat = build_catalogue(inst, config);
    milp::MILPModel model;
    model.variables.reserve(cat.total);

    auto cid = [&](int i) { return inst.customers[i].id; };
    auto did = [&](int d) { return inst.drones[d].id; };
    auto pid = [&](int p) { return inst.depots[p]; };

    // Columns, in catalogue order.
    for (int d = 0; d < cat.nd; ++d)
        model.add_variable("W_" + did(d), 0, 1, milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_variable("Y_" + cid(i) + "_" + did(d) + "_" + pid(p), 0, 1,
                                   milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        model.add_variable("Z_" + cid(i), 0, 1, milp::VarKind::BINARY);
    for (int p = 0; p < cat.np; ++p)
        model.add_variable("T_" + pid(p), 0, 1, milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        for (int p = 0; p < cat.np; ++p)
            for (int q = 0; q < cat.np; ++q) {
                if (q == p) continue;
                model.add_variable("M_" + cid(i) + "_" + pid(p) + "_" + pid(q), 0, 1,
                                   milp::VarKind::BINARY);
            }
    for (int d = 0; d < cat.nd; ++d)
        for (int p = 0; p < cat.np; ++p)
            model.add_variable("B_" + did(d) + "_" + pid(p), 0, 1, milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            model.add_variable("U_" + cid(i) + "_" + did(d), 0, cat.nc,
                               milp::VarKind::INTEGER);
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d)
                model.add_variable("A_" + cid(i) + "_" + cid(j) + "_" + did(d), 0, 1,
                                   milp::VarKind::BINARY);
        }
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int w = 0; w < cat.nw; ++w)
                model.add_variable("Xb_" + cid(i) + "_" + did(d) + "_w" + std::to_string(w),
                                   0, 1, milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int w = 0; w < cat.nw; ++w)
                for (int l = 0; l < cat.nl; ++l)
                    model.add_variable("Xa_" + cid(i) + "_" + did(d) + "_w" +
                                           std::to_string(w) + "_l" + std::to_string(l),
                                       0, 1, milp::VarKind::BINARY);
    for (int i = 0; i < cat.nc; ++i)
        for (int r = 0; r < cat.nf; ++r) {
            bool has = detail::find_window(inst.customers[i], r + 1) != nullptr;
            model.add_variable("F_" + cid(i) + "_f" + std::to_string(r + 1), 0,
                               has ? 1 : 0, milp::VarKind::BINARY);
        }
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d)
                model.add_variable("V_" + cid(i) + "_" + cid(j) + "_" + did(d), 0, 1,
                                   milp::VarKind::BINARY);
        }
    for (int i = 0; i < cat.nc; ++i)
        model.add_variable("Q_" + cid(i), 0, cat.big_m_time, milp::VarKind::CONTINUOUS);

    const double Mo = cat.big_m_order;
    const double Mt = cat.big_m_time;
    using milp::LinearTerm;
    using milp::Relation;

    // Package allocation: served from exactly one (drone, depot) or
    // outsourced.
    for (int i = 0; i < cat.nc; ++i) {
        std::vector<LinearTerm> terms;
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), 1});
        terms.push_back({cat.z(i), 1});
        model.add_constraint("alloc_" + cid(i), std::move(terms), Relation::EQUAL, 1);
    }

    // Serving requires an activated drone.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_constraint(
                    "activate_" + cid(i) + "_" + did(d) + "_" + pid(p),
                    {{cat.y(i, d, p), 1}, {cat.w(d), -1}}, Relation::LESS_EQUAL, 0);

    // A drone flies from a single depot.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_constraint(
                    "depot_link_" + cid(i) + "_" + did(d) + "_" + pid(p),
                    {{cat.y(i, d, p), 1}, {cat.b(d, p), -1}}, Relation::LESS_EQUAL, 0);
    for (int d = 0; d < cat.nd; ++d) {
        std::vector<LinearTerm> terms;
        for (int p = 0; p < cat.np; ++p) terms.push_back({cat.b(d, p), 1});
        terms.push_back({cat.w(d), -1});
        model.add_constraint("depot_one_" + did(d), std::move(terms), Relation::EQUAL, 0);
    }

    // Serving a package from a depot other than its origin moves it there
    // first, marking both depots of the transfer.
    for (int i = 0; i < cat.nc; ++i) {
        int origin = inst.depot_index(inst.customers[i].origin_depot);
        for (int q = 0; q < cat.np; ++q) {
            if (q == origin) continue;
            std::vector<LinearTerm> terms;
            for (int d = 0; d < cat.nd; ++d) terms.push_back({cat.y(i, d, q), 1});
            terms.push_back({cat.m(i, origin, q), -1});
            model.add_constraint("transfer_" + cid(i) + "_" + pid(q), std::move(terms),
                                 Relation::LESS_EQUAL, 0);
        }
    }
    for (int i = 0; i < cat.nc; ++i)
        for (int p = 0; p < cat.np; ++p)
            for (int q = 0; q < cat.np; ++q) {
                if (q == p) continue;
                model.add_constraint(
                    "transfer_src_" + cid(i) + "_" + pid(p) + "_" + pid(q),
                    {{cat.m(i, p, q), 1}, {cat.t(p), -1}}, Relation::LESS_EQUAL, 0);
                model.add_constraint(
                    "transfer_dst_" + cid(i) + "_" + pid(p) + "_" + pid(q),
                    {{cat.m(i, p, q), 1}, {cat.t(q), -1}}, Relation::LESS_EQUAL, 0);
            }

    // Physical limits: package weight, trip range, daily range.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_constraint("capacity_" + cid(i) + "_" + did(d) + "_" + pid(p),
                                     {{cat.y(i, d, p), inst.customers[i].weight_kg}},
                                     Relation::LESS_EQUAL, inst.drones[d].capacity_kg);
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_constraint("trip_range_" + cid(i) + "_" + did(d) + "_" + pid(p),
                                     {{cat.y(i, d, p), inst.round_trip_km(i, p)}},
                                     Relation::LESS_EQUAL, inst.drones[d].trip_range_km);
    for (int d = 0; d < cat.nd; ++d) {
        std::vector<LinearTerm> terms;
        for (int i = 0; i < cat.nc; ++i)
            for (int p = 0; p < cat.np; ++p)
                terms.push_back({cat.y(i, d, p), inst.round_trip_km(i, p)});
        if (!terms.empty())
            model.add_constraint("daily_range_" + did(d), std::move(terms),
                                 Relation::LESS_EQUAL, inst.drones[d].daily_range_km);
    }

    // Takeoff recourse: a package on a grounded drone is lost.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int w = 0; w < cat.nw; ++w) {
                double r = inst.scenarios.takeoff[w].cannot_takeoff[d] ? 1.0 : 0.0;
                std::vector<LinearTerm> terms;
                for (int p = 0; p < cat.np; ++p)
                    if (r != 0.0) terms.push_back({cat.y(i, d, p), r});
                terms.push_back({cat.xb(i, d, w), -1});
                model.add_constraint(
                    "takeoff_" + cid(i) + "_" + did(d) + "_w" + std::to_string(w),
                    std::move(terms), Relation::EQUAL, 0);
            }

    // Breakdown recourse: a breakdown while serving i loses i's package...
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int w = 0; w < cat.nw; ++w) {
                if (inst.scenarios.takeoff[w].cannot_takeoff[d]) continue;
                for (int l = 0; l < cat.nl; ++l) {
                    if (!inst.scenarios.breakdown[l].at(i, d, cat.nd)) continue;
                    std::vector<LinearTerm> terms;
                    for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), 1});
                    terms.push_back({cat.xa(i, d, w, l), -1});
                    model.add_constraint("break_" + cid(i) + "_" + did(d) + "_w" +
                                             std::to_string(w) + "_l" + std::to_string(l),
                                         std::move(terms), Relation::LESS_EQUAL, 0);
                }
            }

    // ...and every package served later in the same scenario pair.
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d)
                for (int w = 0; w < cat.nw; ++w)
                    for (int l = 0; l < cat.nl; ++l)
                        model.add_constraint(
                            "break_tail_" + cid(i) + "_" + cid(j) + "_" + did(d) + "_w" +
                                std::to_string(w) + "_l" + std::to_string(l),
                            {{cat.u(i, d), 1},
                             {cat.u(j, d), -1},
                             {cat.xa(j, d, w, l), Mo},
                             {cat.xa(i, d, w, l), -Mo}},
                            Relation::LESS_EQUAL, Mo);
        }

    // Serving order: served customers take distinct positive positions.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d) {
            std::vector<LinearTerm> terms;
            for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), 1});
            terms.push_back({cat.u(i, d), -1});
            model.add_constraint("order_lb_" + cid(i) + "_" + did(d), std::move(terms),
                                 Relation::LESS_EQUAL, 0);
        }
    for (int j = 0; j < cat.nc; ++j)
        for (int d = 0; d < cat.nd; ++d) {
            std::vector<LinearTerm> terms;
            terms.push_back({cat.u(j, d), 1});
            for (int i = 0; i < cat.nc; ++i)
                for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), -1});
            model.add_constraint("order_ub_" + cid(j) + "_" + did(d), std::move(terms),
                                 Relation::LESS_EQUAL, 0);
        }
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d) {
                std::vector<LinearTerm> a_terms{{cat.u(i, d), 1}, {cat.u(j, d), -1},
                                                {cat.a(i, j, d), -Mo}};
                for (int p = 0; p < cat.np; ++p) a_terms.push_back({cat.y(i, d, p), 1});
                model.add_constraint("order_sep_a_" + cid(i) + "_" + cid(j) + "_" + did(d),
                                     std::move(a_terms), Relation::LESS_EQUAL, 0);
                std::vector<LinearTerm> b_terms{{cat.u(i, d), 1}, {cat.u(j, d), -1},
                                                {cat.a(i, j, d), -Mo}};
                for (int p = 0; p < cat.np; ++p) b_terms.push_back({cat.y(i, d, p), -1});
                model.add_constraint("order_sep_b_" + cid(i) + "_" + cid(j) + "_" + did(d),
                                     std::move(b_terms), Relation::GREATER_EQUAL, -Mo);
            }
        }

    // Successor indicator: V picks up every strictly-later pair among the
    // customers the drone actually serves. Customers outside the drone's
    // route hold order value 0 there, so without the serving gate V would be
    // forced against every such pair and the time chains below would couple
    // drones that operate independently.
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d) {
                std::vector<LinearTerm> terms{{cat.u(j, d), 1}, {cat.u(i, d), -1},
                                              {cat.v(i, j, d), -Mo}};
                for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), Mo});
                model.add_constraint("succ_" + cid(i) + "_" + cid(j) + "_" + did(d),
                                     std::move(terms), Relation::LESS_EQUAL, Mo);
            }
        }

    // Round-trip separation of consecutive serving times.
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d) {
                std::vector<LinearTerm> terms{{cat.q(i), 1}, {cat.q(j), -1},
                                              {cat.v(i, j, d), Mt}};
                for (int p = 0; p < cat.np; ++p)
                    terms.push_back({cat.y(i, d, p),
                                     inst.round_trip_min(i, p, d) +
                                         inst.customers[i].serving_time_min});
                model.add_constraint("chain_" + cid(i) + "_" + cid(j) + "_" + did(d),
                                     std::move(terms), Relation::LESS_EQUAL, Mt);
            }
        }

    // Shift window of the serving drone.
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d) {
            std::vector<LinearTerm> terms{{cat.q(i), -1}};
            for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), Mt});
            model.add_constraint("shift_lo_" + cid(i) + "_" + did(d), std::move(terms),
                                 Relation::LESS_EQUAL, Mt - inst.drones[d].shift_start_min);
        }
    for (int i = 0; i < cat.nc; ++i)
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p)
                model.add_constraint(
                    "shift_hi_" + cid(i) + "_" + did(d) + "_" + pid(p),
                    {{cat.q(i), 1}, {cat.y(i, d, p), Mt}}, Relation::LESS_EQUAL,
                    inst.drones[d].shift_end_min - inst.round_trip_min(i, p, d) -
                        inst.customers[i].serving_time_min + Mt);

    // Committed delivery windows bracket the serving time.
    for (int i = 0; i < cat.nc; ++i)
        for (int r = 0; r < cat.nf; ++r) {
            const TimeWindow* win = detail::find_window(inst.customers[i], r + 1);
            if (win == nullptr) continue;
            std::vector<LinearTerm> open_terms{{cat.q(i), -1}, {cat.f(i, r), Mt}};
            for (int d = 0; d < cat.nd; ++d)
                for (int p = 0; p < cat.np; ++p)
                    open_terms.push_back({cat.y(i, d, p), inst.round_trip_min(i, p, d)});
            model.add_constraint("win_open_" + cid(i) + "_f" + std::to_string(r + 1),
                                 std::move(open_terms), Relation::LESS_EQUAL,
                                 Mt - win->start_min);
            std::vector<LinearTerm> close_terms{{cat.q(i), 1}, {cat.f(i, r), Mt}};
            for (int d = 0; d < cat.nd; ++d)
                for (int p = 0; p < cat.np; ++p)
                    close_terms.push_back({cat.y(i, d, p),
                                           inst.round_trip_min(i, p, d) +
                                               inst.customers[i].serving_time_min});
            model.add_constraint("win_close_" + cid(i) + "_f" + std::to_string(r + 1),
                                 std::move(close_terms), Relation::LESS_EQUAL,
                                 Mt + win->end_min);
        }
    for (int i = 0; i < cat.nc; ++i) {
        if (cat.nf == 0) break;
        std::vector<LinearTerm> terms;
        for (int r = 0; r < cat.nf; ++r) terms.push_back({cat.f(i, r), 1});
        model.add_constraint("win_one_" + cid(i), std::move(terms), Relation::LESS_EQUAL,
                             1);
    }
    // No reward for outsourced packages.
    for (int i = 0; i < cat.nc; ++i)
        for (int r = 0; r < cat.nf; ++r) {
            if (detail::find_window(inst.customers[i], r + 1) == nullptr) continue;
            std::vector<LinearTerm> terms{{cat.f(i, r), 1}};
            for (int d = 0; d < cat.nd; ++d)
                for (int p = 0; p < cat.np; ++p) terms.push_back({cat.y(i, d, p), -1});
            model.add_constraint("win_served_" + cid(i) + "_f" + std::to_string(r + 1),
                                 std::move(terms), Relation::LESS_EQUAL, 0);
        }

    // Objective and epsilon bounds on the non-primary objectives.
    LinearExpr primary = build_objective(inst, sel.primary, cat);
    model.sense = sel.primary == Objective::REWARD ? milp::Sense::MAXIMIZE
                                                   : milp::Sense::MINIMIZE;
    model.objective = primary.terms;
    model.objective_constant = primary.constant;
    model.objective_name = std::string("obj_") + to_string(sel.primary);

    if (sel.primary != Objective::UNSUCCESSFUL && sel.max_unsuccessful_pct &&
        std::isfinite(*sel.max_unsuccessful_pct)) {
        LinearExpr e = build_objective(inst, Objective::UNSUCCESSFUL, cat);
        model.add_constraint("eps_unsuccessful", e.terms, Relation::LESS_EQUAL,
                             *sel.max_unsuccessful_pct - e.constant);
    }
    if (sel.primary != Objective::REWARD && sel.min_reward &&
        std::isfinite(*sel.min_reward)) {
        LinearExpr e = build_objective(inst, Objective::REWARD, cat);
        model.add_constraint("eps_reward", e.terms, Relation::GREATER_EQUAL,
                             *sel.min_reward - e.constant);
    }
    if (sel.primary != Objective::COST && sel.max_cost && std::isfinite(*sel.max_cost)) {
        LinearExpr e = build_objective(inst, Objective::COST, cat);
        model.add_constraint("eps_cost", e.terms, Relation::LESS_EQUAL,
                             *sel.max_cost - e.constant);
    }

    // Branching guidance: fixing assignments (Y, Z) decides the schedule shape,
    // window commitments (F) decide the reward term, fleet/transfer structure
    // follows, and the ordering/recourse indicators (U, Xb, Xa, then A, V) are
    // implied once assignments settle. Branching on the implied layers first
    // wanders through equivalent relaxations without closing the gap.
    model.branch_priority.assign(cat.total, 4);
    auto set_priority = [&](int from, int upto, int cls) {
        for (int col = from; col < upto; ++col) model.branch_priority[col] = cls;
    };
    set_priority(cat.w_base, cat.y_base, 2);
    set_priority(cat.y_base, cat.t_base, 0);   // Y and Z
    set_priority(cat.t_base, cat.u_base, 2);   // T, M, B
    set_priority(cat.u_base, cat.a_base, 3);   // U
    set_priority(cat.xb_base, cat.f_base, 3);  // Xb, Xa
    set_priority(cat.f_base, cat.v_base, 1);   // F

    return model;
}

/// Reconstructs the first-stage schedule from a raw solution vector of the
/// model built by build_milp. Throws std::invalid_argument on fractional
/// or contradictory assignments.
inline Schedule decode_schedule(const Instance& inst, const std::vector<double>& values,
                                const FormulationConfig& config = {}) {
    const VariableCatalogue cat = build_catalogue(inst, config);
    if (static_cast<int>(values.size()) != cat.total)
        throw std::invalid_argument("solution vector carries " +
                                    std::to_string(values.size()) +
                                    " values, the formulation has " +
                                    std::to_string(cat.total));
    const double tol = 1e-6;
    auto as_flag = [&](int col, const std::string& what) {
        double v = values[col];
        if (std::abs(v - std::round(v)) > tol)
            throw std::invalid_argument("fractional value " + std::to_string(v) + " for " +
                                        what);
        return static_cast<int>(std::round(v));
    };

    Schedule sched;
    sched.customers.resize(cat.nc);
    sched.serving_order.resize(cat.nd);

    for (int i = 0; i < cat.nc; ++i) {
        CustomerPlan& plan = sched.customers[i];
        const std::string& name = inst.customers[i].id;
        int assignments = as_flag(cat.z(i), "Z_" + name);
        plan.outsourced = assignments == 1;
        for (int d = 0; d < cat.nd; ++d)
            for (int p = 0; p < cat.np; ++p) {
                if (as_flag(cat.y(i, d, p), "Y_" + name) != 1) continue;
                ++assignments;
                plan.outsourced = false;
                plan.drone = d;
                plan.depot = p;
            }
        if (assignments > 1)
            throw std::invalid_argument("customer " + name + " assigned twice");
        if (assignments == 0)
            throw std::invalid_argument("customer " + name + " left unassigned");
        if (!plan.outsourced) {
            plan.start_min = values[cat.q(i)];
            for (int r = 0; r < cat.nf; ++r) {
                if (as_flag(cat.f(i, r), "F_" + name) != 1) continue;
                if (plan.window_rank != 0)
                    throw std::invalid_argument("customer " + name +
                                                " commits to two windows");
                plan.window_rank = r + 1;
            }
        } else {
            for (int r = 0; r < cat.nf; ++r)
                if (as_flag(cat.f(i, r), "F_" + name) == 1)
                    throw std::invalid_argument("customer " + name +
                                                " outsourced yet commits to a window");
        }
    }

    for (int d = 0; d < cat.nd; ++d) {
        std::vector<std::pair<double, int>> served;  // (position, customer)
        for (int i = 0; i < cat.nc; ++i)
            if (!sched.customers[i].outsourced && sched.customers[i].drone == d)
                served.push_back({values[cat.u(i, d)], i});
        std::stable_sort(served.begin(), served.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [pos, i] : served) sched.serving_order[d].push_back(i);
    }
    return sched;
}

/// Expresses a valid schedule as a full solution vector of the model built by
/// build_milp, choosing the cheapest consistent values for every derived
/// indicator. The result satisfies every constraint row, so it can seed the
/// solver with an incumbent. Throws std::invalid_argument if the schedule
/// violates the instance.
inline std::vector<double> encode_schedule(const Instance& inst, const Schedule& sched,
                                           const FormulationConfig& config = {}) {
    detail::check_schedule(inst, sched);
    const VariableCatalogue cat = build_catalogue(inst, config);
    std::vector<double> v(cat.total, 0.0);

    for (int i = 0; i < cat.nc; ++i) {
        const CustomerPlan& plan = sched.customers[i];
        if (plan.outsourced) {
            v[cat.z(i)] = 1;
            continue;
        }
        v[cat.y(i, plan.drone, plan.depot)] = 1;
        v[cat.q(i)] = plan.start_min;
        if (plan.window_rank != 0) {
            if (detail::find_window(inst.customers[i], plan.window_rank) == nullptr)
                throw std::invalid_argument("customer " + inst.customers[i].id +
                                            " commits to a window rank it does not offer");
            v[cat.f(i, plan.window_rank - 1)] = 1;
        }
        int origin = inst.depot_index(inst.customers[i].origin_depot);
        if (plan.depot != origin) {
            v[cat.m(i, origin, plan.depot)] = 1;
            v[cat.t(origin)] = 1;
            v[cat.t(plan.depot)] = 1;
        }
    }

    for (int d = 0; d < cat.nd; ++d) {
        const auto& order = sched.serving_order[d];
        if (order.empty()) continue;
        v[cat.w(d)] = 1;
        v[cat.b(d, sched.customers[order.front()].depot)] = 1;
        for (std::size_t k = 0; k < order.size(); ++k)
            v[cat.u(order[k], d)] = static_cast<double>(k + 1);
        // Lost-package indicators. A grounded drone loses everything through
        // the takeoff indicators; otherwise a flagged breakdown loses the
        // remainder of the route.
        for (int w = 0; w < cat.nw; ++w) {
            if (inst.scenarios.takeoff[w].cannot_takeoff[d]) {
                for (int i : order) v[cat.xb(i, d, w)] = 1;
                continue;
            }
            for (int l = 0; l < cat.nl; ++l) {
                const auto& brk = inst.scenarios.breakdown[l];
                bool hit = false;
                for (int i : order) {
                    hit = hit || brk.at(i, d, cat.nd) != 0;
                    if (hit) v[cat.xa(i, d, w, l)] = 1;
                }
            }
        }
    }

    // Pairwise order indicators over the (customer, drone) position values;
    // absent customers hold position 0.
    for (int i = 0; i < cat.nc; ++i)
        for (int j = 0; j < cat.nc; ++j) {
            if (j == i) continue;
            for (int d = 0; d < cat.nd; ++d) {
                double ui = v[cat.u(i, d)];
                double uj = v[cat.u(j, d)];
                if (ui > uj) v[cat.a(i, j, d)] = 1;
                if (ui >= 1.0 && uj > ui) v[cat.v(i, j, d)] = 1;
            }
        }
    return v;
}

/// Builds a primal heuristic for the solver: reads the plainly integral part
/// of a relaxation point, repairs it into a valid schedule (dropping whatever
/// cannot be served to the outsourcing fallback), and rewrites the vector as
/// the encoded schedule. Returns false when no valid schedule emerges. The
/// instance must outlive the returned function.
inline std::function<bool(std::vector<double>&)> make_schedule_polish(
    const Instance& inst, const FormulationConfig& config = {}) {
    const VariableCatalogue cat = build_catalogue(inst, config);
    return [&inst, cat, config](std::vector<double>& v) -> bool {
        if (static_cast<int>(v.size()) != cat.total) return false;
        try {
            Schedule sched;
            sched.customers.resize(cat.nc);
            sched.serving_order.assign(cat.nd, {});

            // Tentative assignment: strongest of {outsource, (drone, depot)}.
            std::vector<std::vector<int>> picked(cat.nd);
            for (int i = 0; i < cat.nc; ++i) {
                double best = v[cat.z(i)];
                int bd = -1, bp = -1;
                for (int d = 0; d < cat.nd; ++d)
                    for (int p = 0; p < cat.np; ++p)
                        if (v[cat.y(i, d, p)] > best + 1e-9) {
                            best = v[cat.y(i, d, p)];
                            bd = d;
                            bp = p;
                        }
                CustomerPlan& plan = sched.customers[i];
                if (bd < 0) continue;  // stays outsourced
                plan.outsourced = false;
                plan.drone = bd;
                plan.depot = bp;
                for (int r = 0; r < cat.nf; ++r)
                    if (v[cat.f(i, r)] > 0.5 &&
                        (plan.window_rank == 0 ||
                         v[cat.f(i, r)] > v[cat.f(i, plan.window_rank - 1)]))
                        plan.window_rank = r + 1;
                picked[bd].push_back(i);
            }

            for (int d = 0; d < cat.nd; ++d) {
                if (picked[d].empty()) continue;
                // One depot per drone: take the one the relaxation leans on.
                double best_mass = -1.0;
                int depot = 0;
                for (int p = 0; p < cat.np; ++p) {
                    double mass = 0.0;
                    for (int i : picked[d]) mass += v[cat.y(i, d, p)];
                    if (mass > best_mass) {
                        best_mass = mass;
                        depot = p;
                    }
                }
                for (int i : picked[d]) sched.customers[i].depot = depot;
                // Route order from the relaxed serving times, then positions.
                std::sort(picked[d].begin(), picked[d].end(), [&](int a, int b) {
                    double qa = v[cat.q(a)], qb = v[cat.q(b)];
                    if (qa != qb) return qa < qb;
                    double ua = v[cat.u(a, d)], ub = v[cat.u(b, d)];
                    if (ua != ub) return ua < ub;
                    return a < b;
                });

                const Drone& drone = inst.drones[d];
                double prev_done = drone.shift_start_min;
                double day_km = 0.0;
                for (int i : picked[d]) {
                    CustomerPlan& plan = sched.customers[i];
                    const Customer& cust = inst.customers[i];
                    auto outsource = [&]() { plan = CustomerPlan{}; };
                    if (cust.weight_kg > drone.capacity_kg + 1e-9) {
                        outsource();
                        continue;
                    }
                    double km = inst.round_trip_km(i, depot);
                    if (km > drone.trip_range_km + 1e-9 ||
                        day_km + km > drone.daily_range_km + 1e-9) {
                        outsource();
                        continue;
                    }
                    double trip = inst.round_trip_min(i, depot, d);
                    double start = prev_done;
                    const TimeWindow* win =
                        plan.window_rank == 0
                            ? nullptr
                            : detail::find_window(cust, plan.window_rank);
                    if (win == nullptr) plan.window_rank = 0;
                    if (win != nullptr) start = std::max(start, win->start_min + trip);
                    double done = start + trip + cust.serving_time_min;
                    if (win != nullptr && done > win->end_min) {
                        plan.window_rank = 0;
                        start = prev_done;
                        done = start + trip + cust.serving_time_min;
                    }
                    if (done > drone.shift_end_min) {
                        outsource();
                        continue;
                    }
                    plan.start_min = start;
                    prev_done = done;
                    day_km += km;
                    sched.serving_order[d].push_back(i);
                }
            }

            evaluate_schedule(inst, sched);
            v = encode_schedule(inst, sched, config);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    };
}

}  // namespace droneplan

#endif  // DRONEPLAN_FORMULATION_HPP
