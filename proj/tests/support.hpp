#ifndef DRONEPLAN_TESTS_SUPPORT_HPP
#define DRONEPLAN_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "droneplan/evaluator.hpp"
#include "droneplan/instance.hpp"
#include "droneplan/milp/model.hpp"
#include "droneplan/schedule.hpp"

namespace testsupport {

using droneplan::BreakdownScenario;
using droneplan::Customer;
using droneplan::DistanceMatrix;
using droneplan::Drone;
using droneplan::Instance;
using droneplan::Schedule;
using droneplan::TakeoffScenario;

/// Deterministic uniform draws from the project's counter-based stream.
class Draw {
  public:
    explicit Draw(std::uint64_t seed) : seed_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * droneplan::rng::canonical(seed_, counter_++);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform(0.0, 1.0) * (hi - lo + 1));
    }
    bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Fills the distance table with every ordered pair among the instance's
/// locations (validation requires completeness).
inline void set_all_distances(Instance& inst, Draw& draw, double lo, double hi) {
    std::vector<std::string> locations;
    for (const auto& c : inst.customers) locations.push_back(c.id);
    for (const auto& p : inst.depots) locations.push_back(p);
    inst.distances = DistanceMatrix(locations);
    for (const auto& u : locations)
        for (const auto& v : locations)
            if (u != v) inst.distances.set(u, v, draw.uniform(lo, hi));
}

/// Two-by-two scenario set: takeoff {all fly: 1-q, all grounded: q},
/// breakdown {no breakdowns: 1-r, breakdown at every (customer, drone): r}.
inline void set_two_by_two_scenarios(Instance& inst, double q, double r) {
    inst.scenarios = {};
    TakeoffScenario fly, grounded;
    fly.probability = 1.0 - q;
    fly.cannot_takeoff.assign(inst.drones.size(), 0);
    grounded.probability = q;
    grounded.cannot_takeoff.assign(inst.drones.size(), 1);
    inst.scenarios.takeoff = {fly, grounded};
    BreakdownScenario calm, stormy;
    calm.probability = 1.0 - r;
    calm.breaks.assign(inst.customers.size() * inst.drones.size(), 0);
    stormy.probability = r;
    stormy.breaks.assign(inst.customers.size() * inst.drones.size(), 1);
    inst.scenarios.breakdown = {calm, stormy};
}

/// One customer 2 km from the only depot, one drone, the 0.9/0.1
/// two-by-two scenario model. The drone serving the customer yields
/// an unsuccessful-delivery expectation of exactly 19 percent.
inline Instance single_customer_instance() {
    Instance inst;
    inst.depots = {"p1"};
    Customer c;
    c.id = "c1";
    c.weight_kg = 2.0;
    c.serving_time_min = 5.0;
    c.origin_depot = "p1";
    c.windows = {{1, 480.0, 600.0}};
    inst.customers = {c};
    Drone d;
    d.id = "d1";
    d.capacity_kg = 5.0;
    d.trip_range_km = 10.0;
    d.daily_range_km = 150.0;
    d.shift_start_min = 480.0;
    d.shift_end_min = 960.0;
    d.speed_kmh = 30.0;
    d.initial_cost = 100.0;
    inst.drones = {d};
    inst.distances = DistanceMatrix({"c1", "p1"});
    inst.distances.set("c1", "p1", 2.0);
    inst.distances.set("p1", "c1", 2.0);
    set_two_by_two_scenarios(inst, 0.1, 0.1);
    inst.costs.outsource_cost = {16.0};
    inst.costs.transfer_cost = {30.0};
    inst.costs.routing_rate_per_km = 0.105;
    inst.costs.window_rewards = {15.0, 10.0};
    return inst;
}

inline Schedule all_outsource_schedule(const Instance& inst) {
    Schedule s;
    s.customers.assign(inst.customers.size(), droneplan::CustomerPlan{});
    s.serving_order.assign(inst.drones.size(), std::vector<int>{});
    return s;
}

/// Shared body of the randomized instance generators; consumes `draw` in a
/// fixed order so seeded instances stay stable.
inline Instance random_instance_core(Draw& draw, int nc, int nd, int np) {
    Instance inst;
    for (int p = 0; p < np; ++p) inst.depots.push_back("p" + std::to_string(p + 1));
    for (int d = 0; d < nd; ++d) {
        Drone dr;
        dr.id = "d" + std::to_string(d + 1);
        dr.capacity_kg = 5.0;
        dr.trip_range_km = draw.uniform(9.0, 12.0);
        dr.daily_range_km = draw.uniform(22.0, 50.0);
        dr.shift_start_min = 480.0 + draw.uniform(-30.0, 30.0);
        dr.shift_end_min = 900.0 + draw.uniform(-30.0, 60.0);
        dr.speed_kmh = 30.0;
        dr.initial_cost = draw.uniform(15.0, 60.0);
        inst.drones.push_back(dr);
    }
    for (int c = 0; c < nc; ++c) {
        Customer cu;
        cu.id = "c" + std::to_string(c + 1);
        cu.weight_kg = draw.uniform(1.0, 6.0);
        cu.serving_time_min = draw.uniform(4.0, 10.0);
        cu.origin_depot = inst.depots[draw.uniform_int(0, np - 1)];
        int windows = draw.uniform_int(0, 2);
        double horizon = 520.0 + draw.uniform(0.0, 260.0);
        for (int f = 1; f <= windows; ++f) {
            double start = horizon + draw.uniform(0.0, 60.0);
            double len = draw.uniform(40.0, 150.0);
            cu.windows.push_back({f, start, start + len});
            horizon = start + draw.uniform(10.0, 40.0);
        }
        inst.customers.push_back(cu);
    }
    set_all_distances(inst, draw, 1.0, 5.5);

    TakeoffScenario fly, storm;
    fly.probability = 0.85;
    fly.cannot_takeoff.assign(nd, 0);
    storm.probability = 0.15;
    storm.cannot_takeoff.assign(nd, 0);
    for (int d = 0; d < nd; ++d) storm.cannot_takeoff[d] = draw.bernoulli(0.6) ? 1 : 0;
    inst.scenarios.takeoff = {fly, storm};
    BreakdownScenario calm, rough;
    calm.probability = 0.8;
    calm.breaks.assign(static_cast<std::size_t>(nc) * nd, 0);
    rough.probability = 0.2;
    rough.breaks.assign(static_cast<std::size_t>(nc) * nd, 0);
    for (std::size_t k = 0; k < rough.breaks.size(); ++k)
        rough.breaks[k] = draw.bernoulli(0.35) ? 1 : 0;
    inst.scenarios.breakdown = {calm, rough};

    for (int c = 0; c < nc; ++c)
        inst.costs.outsource_cost.push_back(draw.uniform(12.0, 28.0));
    for (int p = 0; p < np; ++p)
        inst.costs.transfer_cost.push_back(draw.uniform(0.0, 25.0));
    inst.costs.routing_rate_per_km = 0.105;
    inst.costs.window_rewards = {15.0, 9.5};
    return inst;
}

/// Randomized instance within the exhaustive-enumeration cap: up to
/// 4 customers, 2 drones, 2 depots, 2 window ranks, 2x2 scenarios.
/// Deterministic in the seed; always passes validate_instance.
inline Instance random_small_instance(std::uint64_t seed) {
    Draw draw(seed);
    const int np = draw.uniform_int(1, 2);
    const int nd = draw.uniform_int(1, 2);
    const int nc = draw.uniform_int(2, 4);
    return random_instance_core(draw, nc, nd, np);
}

/// Randomized instance of a requested size; same flavor as
/// random_small_instance without the enumeration cap.
inline Instance random_instance(std::uint64_t seed, int nc, int nd, int np) {
    Draw draw(seed);
    return random_instance_core(draw, nc, nd, np);
}

/// Random pure-binary MILP with up to `max_vars` columns, mixed relation
/// rows and integer-ish coefficients; used against exhaustive enumeration.
inline droneplan::milp::MILPModel random_binary_milp(std::uint64_t seed, int max_vars = 16) {
    Draw draw(seed);
    droneplan::milp::MILPModel model;
    const int n = draw.uniform_int(1, max_vars);
    const int m = draw.uniform_int(1, 10);
    model.sense = draw.bernoulli(0.5) ? droneplan::milp::Sense::MINIMIZE
                                      : droneplan::milp::Sense::MAXIMIZE;
    for (int j = 0; j < n; ++j) {
        model.add_variable("x" + std::to_string(j), 0, 1,
                           droneplan::milp::VarKind::BINARY);
        model.objective.push_back({j, draw.uniform_int(-20, 20) / 2.0});
    }
    for (int i = 0; i < m; ++i) {
        std::vector<droneplan::milp::LinearTerm> terms;
        for (int j = 0; j < n; ++j)
            if (draw.bernoulli(0.6)) terms.push_back({j, static_cast<double>(
                                                             draw.uniform_int(-6, 6))});
        if (terms.empty()) terms.push_back({draw.uniform_int(0, n - 1), 1.0});
        double roll = draw.uniform(0.0, 1.0);
        droneplan::milp::Relation rel = roll < 0.45
                                            ? droneplan::milp::Relation::LESS_EQUAL
                                            : roll < 0.9
                                                  ? droneplan::milp::Relation::GREATER_EQUAL
                                                  : droneplan::milp::Relation::EQUAL;
        model.add_constraint("r" + std::to_string(i), std::move(terms), rel,
                             static_cast<double>(draw.uniform_int(-8, 8)));
    }
    return model;
}

}  // namespace testsupport

#endif  // DRONEPLAN_TESTS_SUPPORT_HPP
