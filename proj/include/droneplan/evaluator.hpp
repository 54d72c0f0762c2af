#ifndef DRONEPLAN_EVALUATOR_HPP
#define DRONEPLAN_EVALUATOR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "droneplan/instance.hpp"
#include "droneplan/schedule.hpp"

namespace droneplan {

namespace rng {

/// Counter-based uniform stream: word(seed, n) is the n-th 64-bit output of
/// the splitmix64 sequence seeded with `seed`. Any output can be computed
/// directly from (seed, counter), so replays are reproducible and
/// order-independent.
inline std::uint64_t word(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of word(seed, counter).
inline double canonical(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(word(seed, counter) >> 11) * 0x1.0p-53;
}

}  // namespace rng

namespace detail {

/// Consistency gate shared by the analytic evaluator and the simulator.
/// Throws std::invalid_argument on the first structural defect found.
inline void check_schedule(const Instance& inst, const Schedule& sched) {
    const int nc = inst.num_customers();
    const int nd = inst.num_drones();
    if (static_cast<int>(sched.customers.size()) != nc)
        throw std::invalid_argument("schedule covers " +
                                    std::to_string(sched.customers.size()) +
                                    " customers, instance has " + std::to_string(nc));
    if (static_cast<int>(sched.serving_order.size()) != nd)
        throw std::invalid_argument("schedule must carry a serving order per drone");

    std::vector<int> position(nc, -1);  // position of customer in its drone's order
    std::vector<int> order_drone(nc, -1);
    for (int d = 0; d < nd; ++d) {
        for (std::size_t k = 0; k < sched.serving_order[d].size(); ++k) {
            int i = sched.serving_order[d][k];
            if (i < 0 || i >= nc)
                throw std::invalid_argument("serving order of drone " + inst.drones[d].id +
                                            " references unknown customer index " +
                                            std::to_string(i));
            if (order_drone[i] != -1)
                throw std::invalid_argument("customer " + inst.customers[i].id +
                                            " appears in more than one serving slot");
            order_drone[i] = d;
            position[i] = static_cast<int>(k);
        }
    }

    for (int i = 0; i < nc; ++i) {
        const CustomerPlan& plan = sched.customers[i];
        const Customer& cust = inst.customers[i];
        if (plan.outsourced) {
            if (order_drone[i] != -1)
                throw std::invalid_argument("customer " + cust.id +
                                            " is outsourced but listed in a serving order");
            if (plan.window_rank != 0)
                throw std::invalid_argument("customer " + cust.id +
                                            " is outsourced but commits to a window");
            continue;
        }
        if (plan.drone < 0 || plan.drone >= nd)
            throw std::invalid_argument("customer " + cust.id + " has no valid drone");
        if (plan.depot < 0 || plan.depot >= inst.num_depots())
            throw std::invalid_argument("customer " + cust.id + " has no valid depot");
        if (order_drone[i] != plan.drone)
            throw std::invalid_argument("customer " + cust.id +
                                        " missing from its drone's serving order");
        if (plan.window_rank != 0) {
            bool known = false;
            for (const auto& w : cust.windows) known = known || w.rank == plan.window_rank;
            if (!known)
                throw std::invalid_argument("customer " + cust.id +
                                            " commits to unknown window rank " +
                                            std::to_string(plan.window_rank));
        }
    }

    // One departure depot per drone, and physical limits per trip/day/shift.
    const double tol = 1e-6;
    for (int d = 0; d < nd; ++d) {
        const Drone& drone = inst.drones[d];
        const auto& order = sched.serving_order[d];
        if (order.empty()) continue;
        int depot = sched.customers[order.front()].depot;
        double day_km = 0.0;
        double prev_done = drone.shift_start_min;
        for (std::size_t k = 0; k < order.size(); ++k) {
            int i = order[k];
            const CustomerPlan& plan = sched.customers[i];
            const Customer& cust = inst.customers[i];
            if (plan.depot != depot)
                throw std::invalid_argument("drone " + drone.id +
                                            " departs from more than one depot");
            if (cust.weight_kg > drone.capacity_kg + tol)
                throw std::invalid_argument("customer " + cust.id + " exceeds capacity of drone " +
                                            drone.id);
            double trip_km = inst.round_trip_km(i, depot);
            if (trip_km > drone.trip_range_km + tol)
                throw std::invalid_argument("customer " + cust.id + " lies beyond trip range of drone " +
                                            drone.id);
            day_km += trip_km;
            double trip_min = inst.round_trip_min(i, depot, d);
            if (plan.start_min + tol < prev_done)
                throw std::invalid_argument("serving times of drone " + drone.id +
                                            " violate round-trip separation at customer " +
                                            cust.id);
            if (plan.start_min + trip_min + cust.serving_time_min >
                drone.shift_end_min + tol)
                throw std::invalid_argument("customer " + cust.id + " finishes after shift end of drone " +
                                            drone.id);
            if (plan.window_rank != 0) {
                for (const auto& w : cust.windows) {
                    if (w.rank != plan.window_rank) continue;
                    if (plan.start_min + tol < w.start_min + trip_min)
                        throw std::invalid_argument("customer " + cust.id +
                                                    " served before committed window opens");
                    if (plan.start_min + trip_min + cust.serving_time_min >
                        w.end_min + tol)
                        throw std::invalid_argument("customer " + cust.id +
                                                    " served after committed window closes");
                }
            }
            prev_done = plan.start_min + trip_min + cust.serving_time_min;
        }
        if (day_km > drone.daily_range_km + tol)
            throw std::invalid_argument("drone " + drone.id + " exceeds its daily range");
    }
}

/// Packages lost by drone `d` in takeoff scenario `w` / breakdown scenario
/// `l`: all of them if the drone cannot take off, otherwise every package at
/// or after the first serving position whose breakdown flag is set.
inline int lost_by_drone(const Instance& inst, const Schedule& sched, int d, int w, int l) {
    const auto& order = sched.serving_order[d];
    int n = static_cast<int>(order.size());
    if (n == 0) return 0;
    if (inst.scenarios.takeoff[w].cannot_takeoff[d]) return n;
    const auto& brk = inst.scenarios.breakdown[l];
    for (int k = 0; k < n; ++k)
        if (brk.at(order[k], d, inst.num_drones())) return n - k;
    return 0;
}

}  // namespace detail

/// Evaluates the three objectives of a schedule analytically, taking the
/// exact expectation over the scenario distributions. Throws
/// std::invalid_argument if the schedule is inconsistent with the instance.
inline ObjectiveVector evaluate_schedule(const Instance& inst, const Schedule& sched) {
    detail::check_schedule(inst, sched);

    ObjectiveVector obj;
    const int nc = inst.num_customers();
    const int nd = inst.num_drones();

    // Cost: drone activation, depot transfers, routing, outsourcing.
    std::vector<bool> depot_touched(inst.num_depots(), false);
    for (int d = 0; d < nd; ++d) {
        if (sched.serving_order[d].empty()) continue;
        obj.total_cost += inst.drones[d].initial_cost;
        for (int i : sched.serving_order[d]) {
            int from = sched.customers[i].depot;
            double km = inst.round_trip_km(i, from);
            obj.total_cost += routing_cost(inst.costs, km);
            int origin = inst.depot_index(inst.customers[i].origin_depot);
            if (origin != from) {
                depot_touched[origin] = true;
                depot_touched[from] = true;
            }
        }
    }
    for (int p = 0; p < inst.num_depots(); ++p)
        if (depot_touched[p]) obj.total_cost += inst.costs.transfer_cost[p];
    for (int i = 0; i < nc; ++i)
        if (sched.customers[i].outsourced) obj.total_cost += inst.costs.outsource_cost[i];

    // Expected percentage of packages that never reach their customer.
    if (nc > 0) {
        double expected_lost = 0.0;
        for (std::size_t w = 0; w < inst.scenarios.takeoff.size(); ++w) {
            double pw = inst.scenarios.takeoff[w].probability;
            for (std::size_t l = 0; l < inst.scenarios.breakdown.size(); ++l) {
                double pl = inst.scenarios.breakdown[l].probability;
                int lost = 0;
                for (int d = 0; d < nd; ++d)
                    lost += detail::lost_by_drone(inst, sched, d, static_cast<int>(w),
                                                  static_cast<int>(l));
                expected_lost += pw * pl * lost;
            }
        }
        obj.unsuccessful_pct = 100.0 / nc * expected_lost;
    }

    // Reward of committed delivery windows.
    for (int i = 0; i < nc; ++i) {
        int rank = sched.customers[i].window_rank;
        if (rank > 0) obj.reward += inst.costs.window_rewards[rank - 1];
    }
    return obj;
}

/// Monte Carlo estimate of the unsuccessful-delivery percentage.
struct MonteCarloResult {
    double estimate_pct = 0.0;
    double stderr_pct = 0.0;
    long samples = 0;
};

/// Samples (takeoff, breakdown) scenario pairs iid from the instance
/// marginals with the counter-based stream rng::word(seed, .), replays the
/// schedule under each pair and averages the per-sample unsuccessful
/// percentage. Deterministic in (instance, schedule, samples, seed).
inline MonteCarloResult monte_carlo_unsuccessful(const Instance& inst, const Schedule& sched,
                                                 long samples, std::uint64_t seed) {
    if (samples <= 0) throw std::invalid_argument("sample count must be positive");
    detail::check_schedule(inst, sched);

    const int nc = inst.num_customers();
    MonteCarloResult res;
    res.samples = samples;
    if (nc == 0) return res;

    auto pick = [](const std::vector<double>& cumulative, double u) {
        for (std::size_t k = 0; k < cumulative.size(); ++k)
            if (u < cumulative[k]) return static_cast<int>(k);
        return static_cast<int>(cumulative.size()) - 1;
    };
    std::vector<double> cum_w, cum_l;
    {
        double acc = 0.0;
        for (const auto& s : inst.scenarios.takeoff) cum_w.push_back(acc += s.probability);
        acc = 0.0;
        for (const auto& s : inst.scenarios.breakdown) cum_l.push_back(acc += s.probability);
    }

    // Per-sample loss counts are small integers, so the accumulated sums
    // below are exact and the estimate is reproducible bit for bit.
    double total = 0.0;
    double total_sq = 0.0;
    for (long s = 0; s < samples; ++s) {
        int w = pick(cum_w, rng::canonical(seed, 2 * static_cast<std::uint64_t>(s)));
        int l = pick(cum_l, rng::canonical(seed, 2 * static_cast<std::uint64_t>(s) + 1));
        int lost = 0;
        for (int d = 0; d < inst.num_drones(); ++d)
            lost += detail::lost_by_drone(inst, sched, d, w, l);
        total += lost;
        total_sq += static_cast<double>(lost) * lost;
    }

    const double n = static_cast<double>(samples);
    res.estimate_pct = 100.0 / nc * (total / n);
    if (samples > 1) {
        double var_count = (total_sq - total * total / n) / (n - 1.0);
        if (var_count < 0.0) var_count = 0.0;  // guard tiny negative rounding
        res.stderr_pct = 100.0 / nc * std::sqrt(var_count / n);
    }
    return res;
}

}  // namespace droneplan

#endif  // DRONEPLAN_EVALUATOR_HPP
