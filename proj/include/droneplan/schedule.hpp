#ifndef DRONEPLAN_SCHEDULE_HPP
#define DRONEPLAN_SCHEDULE_HPP

#include <vector>

namespace droneplan {

/// The three planning objectives of one schedule:
///  * total_cost       -- drone activation + transfers + routing + outsourcing
///  * unsuccessful_pct -- expected percentage of packages not delivered by
///                        drone once takeoff and breakdown uncertainty is
///                        accounted for (outsourced packages count as
///                        delivered)
///  * reward           -- total reward of the delivery time windows that the
///                        schedule commits to
struct ObjectiveVector {
    double total_cost = 0.0;
    double unsuccessful_pct = 0.0;
    double reward = 0.0;
};

/// Which objective a solve optimizes.
enum class Objective { COST, UNSUCCESSFUL, REWARD };

inline const char* to_string(Objective o) {
    switch (o) {
        case Objective::COST: return "cost";
        case Objective::UNSUCCESSFUL: return "unsuccessful";
        case Objective::REWARD: return "reward";
    }
    return "?";
}

/// Objective vector component selected by an Objective tag.
inline double value_of(const ObjectiveVector& v, Objective o) {
    switch (o) {
        case Objective::COST: return v.total_cost;
        case Objective::UNSUCCESSFUL: return v.unsuccessful_pct;
        case Objective::REWARD: return v.reward;
    }
    return 0.0;
}

/// Delivery plan for one customer. Indices refer to the owning Instance.
struct CustomerPlan {
    bool outsourced = true;
    int drone = -1;        // serving drone (drone deliveries only)
    int depot = -1;        // depot the drone departs from
    double start_min = 0;  // serving start time at the depot
    int window_rank = 0;   // committed delivery window rank, 0 = none
};

/// A complete first-stage decision: per-customer plans plus the serving
/// order of every drone (customer indices, earliest first).
struct Schedule {
    std::vector<CustomerPlan> customers;           // aligned with Instance::customers
    std::vector<std::vector<int>> serving_order;   // aligned with Instance::drones
};

}  // namespace droneplan

#endif  // DRONEPLAN_SCHEDULE_HPP
