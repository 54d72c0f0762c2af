#ifndef DRONEPLAN_ORACLE_HPP
#define DRONEPLAN_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "droneplan/evaluator.hpp"
#include "droneplan/formulation.hpp"
#include "droneplan/instance.hpp"
#include "droneplan/schedule.hpp"

namespace droneplan {

/// One feasible schedule found by exhaustive enumeration, with its exact
/// objective vector.
struct OracleCandidate {
    Schedule schedule;
    ObjectiveVector objectives;
};

namespace detail {

constexpr int kOracleMaxCustomers = 4;
constexpr int kOracleMaxDrones = 2;
constexpr int kOracleMaxDepots = 2;
constexpr int kOracleMaxWindowRanks = 2;

/// Appends every feasible (ordering, window commitment, earliest-start
/// timing) completion of drone `d` flying from depot `p` over the customer
/// set `members`. Serving times are set greedily to their lowest feasible
/// value; with the commitments fixed, every remaining constraint is an
/// upper bound, so the greedy completion exists iff any completion does.
inline void complete_drone(const Instance& inst, int d, int p,
                           const std::vector<int>& members,
                           std::vector<std::vector<CustomerPlan>>& out,
                           std::vector<std::vector<int>>& orders) {
    const Drone& drone = inst.drones[d];
    double daily_km = 0.0;
    for (int i : members) {
        if (inst.customers[i].weight_kg > drone.capacity_kg) return;
        double rt = inst.round_trip_km(i, p);
        if (rt > drone.trip_range_km) return;
        daily_km += rt;
    }
    if (daily_km > drone.daily_range_km) return;

    std::vector<int> perm = members;
    std::sort(perm.begin(), perm.end());
    do {
        // Window choice per position: 0 = none, r = commit to rank r.
        std::vector<std::vector<int>> options(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) {
            options[k].push_back(0);
            for (const auto& w : inst.customers[perm[k]].windows)
                options[k].push_back(w.rank);
        }
        std::vector<std::size_t> pick(perm.size(), 0);
        while (true) {
            std::vector<CustomerPlan> plans(perm.size());
            double prev_done = drone.shift_start_min;
            bool ok = true;
            for (std::size_t k = 0; k < perm.size() && ok; ++k) {
                int i = perm[k];
                double rt = inst.round_trip_min(i, p, d);
                double serve = inst.customers[i].serving_time_min;
                int rank = options[k][pick[k]];
                double start = std::max(prev_done, drone.shift_start_min);
                const TimeWindow* win = nullptr;
                if (rank != 0) {
                    for (const auto& w : inst.customers[i].windows)
                        if (w.rank == rank) win = &w;
                    start = std::max(start, win->start_min + rt);
                }
                double done = start + rt + serve;
                if (done > drone.shift_end_min) ok = false;
                if (win != nullptr && done > win->end_min) ok = false;
                plans[k] = CustomerPlan{false, d, p, start, rank};
                prev_done = done;
            }
            if (ok) {
                out.push_back(plans);
                orders.push_back(perm);
            }
            std::size_t k = 0;
            while (k < pick.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
            if (k == pick.size()) break;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace detail

/// Exhaustively enumerates every feasible schedule of a small instance:
/// all assignments of customers to drones or outsourcing, all depot
/// choices of the used drones, all serving orders and window commitments,
/// with earliest-feasible serving times. Intended as an independent
/// correctness reference; refuses instances beyond the hard cap of
/// 4 customers, 2 drones, 2 depots and 2 window ranks.
inline std::vector<OracleCandidate> enumerate_feasible_schedules(const Instance& inst) {
    {
        auto violations = validate_instance(inst);
        if (!violations.empty())
            throw std::invalid_argument("invalid instance: " + violations.front());
    }
    const int nc = inst.num_customers();
    const int nd = inst.num_drones();
    const int np = inst.num_depots();
    if (nc > detail::kOracleMaxCustomers || nd > detail::kOracleMaxDrones ||
        np > detail::kOracleMaxDepots ||
        inst.num_window_ranks() > detail::kOracleMaxWindowRanks)
        throw std::invalid_argument(
            "instance too large for exhaustive enumeration (limits: 4 customers, "
            "2 drones, 2 depots, 2 window ranks)");

    std::vector<OracleCandidate> found;
    std::vector<int> assign(nc, 0);  // 0 = outsourced, 1+d = drone d
    while (true) {
        std::vector<std::vector<int>> members(nd);
        for (int i = 0; i < nc; ++i)
            if (assign[i] > 0) members[assign[i] - 1].push_back(i);
        std::vector<int> used;
        for (int d = 0; d < nd; ++d)
            if (!members[d].empty()) used.push_back(d);

        // Depot choice per used drone.
        std::vector<int> depot(used.size(), 0);
        while (true) {
            // Per-drone completions, combined as a cross product.
            std::vector<std::vector<std::vector<CustomerPlan>>> plans(used.size());
            std::vector<std::vector<std::vector<int>>> orders(used.size());
            bool any_empty = false;
            for (std::size_t k = 0; k < used.size(); ++k) {
                detail::complete_drone(inst, used[k], depot[k], members[used[k]],
                                       plans[k], orders[k]);
                if (plans[k].empty()) any_empty = true;
            }
            if (!any_empty) {
                std::vector<std::size_t> pick(used.size(), 0);
                while (true) {
                    Schedule s;
                    s.customers.assign(nc, CustomerPlan{});
                    s.serving_order.assign(nd, std::vector<int>{});
                    for (std::size_t k = 0; k < used.size(); ++k) {
                        const auto& order = orders[k][pick[k]];
                        const auto& plan = plans[k][pick[k]];
                        s.serving_order[used[k]] = order;
                        for (std::size_t pos = 0; pos < order.size(); ++pos)
                            s.customers[order[pos]] = plan[pos];
                    }
                    found.push_back({s, evaluate_schedule(inst, s)});
                    std::size_t k = 0;
                    while (k < pick.size() && ++pick[k] == plans[k].size()) pick[k++] = 0;
                    if (k == pick.size()) break;
                }
            }
            std::size_t k = 0;
            while (k < depot.size() && ++depot[k] == np) depot[k++] = 0;
            if (k == depot.size() || used.empty()) break;
        }

        int i = 0;
        while (i < nc && ++assign[i] == nd + 1) assign[i++] = 0;
        if (i == nc) break;
    }
    return found;
}

/// Result of an exhaustive single-cell optimization.
struct OracleResult {
    bool feasible = false;
    Schedule schedule;
    ObjectiveVector objectives;
};

namespace detail {

inline bool within_bounds(const ObjectiveVector& v, const ObjectiveSelection& sel) {
    auto slack = [](double eps) { return 1e-7 * (1.0 + std::abs(eps)); };
    if (sel.primary != Objective::UNSUCCESSFUL && sel.max_unsuccessful_pct &&
        std::isfinite(*sel.max_unsuccessful_pct) &&
        v.unsuccessful_pct > *sel.max_unsuccessful_pct + slack(*sel.max_unsuccessful_pct))
        return false;
    if (sel.primary != Objective::REWARD && sel.min_reward &&
        std::isfinite(*sel.min_reward) &&
        v.reward < *sel.min_reward - slack(*sel.min_reward))
        return false;
    if (sel.primary != Objective::COST && sel.max_cost && std::isfinite(*sel.max_cost) &&
        v.total_cost > *sel.max_cost + slack(*sel.max_cost))
        return false;
    return true;
}

/// Lexicographic preference among equal-primary candidates: lowest cost,
/// then fewest expected losses, then highest reward.
inline bool lex_better(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
    if (a.unsuccessful_pct != b.unsuccessful_pct)
        return a.unsuccessful_pct < b.unsuccessful_pct;
    return a.reward > b.reward;
}

}  // namespace detail

/// Optimizes one objective over a pre-enumerated candidate list, honoring
/// the bounds of the selection. Ties on the primary objective are broken
/// lexicographically (cost, unsuccessful, reward), then by enumeration
/// order.
inline OracleResult brute_force_optimum(const ObjectiveSelection& sel,
                                        const std::vector<OracleCandidate>& candidates) {
    OracleResult best;
    const double dir = sel.primary == Objective::REWARD ? -1.0 : 1.0;
    for (const auto& cand : candidates) {
        if (!detail::within_bounds(cand.objectives, sel)) continue;
        if (!best.feasible) {
            best = {true, cand.schedule, cand.objectives};
            continue;
        }
        double v = value_of(cand.objectives, sel.primary);
        double b = value_of(best.objectives, sel.primary);
        double tie = 1e-9 * (1.0 + std::abs(b));
        if (dir * (v - b) < -tie)
            best = {true, cand.schedule, cand.objectives};
        else if (std::abs(v - b) <= tie &&
                 detail::lex_better(cand.objectives, best.objectives))
            best = {true, cand.schedule, cand.objectives};
    }
    return best;
}

/// Convenience overload that enumerates and optimizes in one call.
inline OracleResult brute_force_optimum(const Instance& inst,
                                        const ObjectiveSelection& sel) {
    return brute_force_optimum(sel, enumerate_feasible_schedules(inst));
}

}  // namespace droneplan

#endif  // DRONEPLAN_ORACLE_HPP
