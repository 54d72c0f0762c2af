#ifndef DRONEPLAN_INSTANCE_HPP
#define DRONEPLAN_INSTANCE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace droneplan {

/// A delivery time window, identified by its preference rank (1 = most
/// preferred). Times are real-valued minutes from midnight.
struct TimeWindow {
    int rank = 1;
    double start_min = 0.0;
    double end_min = 0.0;
};

struct Customer {
    std::string id;
    double weight_kg = 0.0;
    double serving_time_min = 0.0;
    std::string origin_depot;
    std::vector<TimeWindow> windows;  // ordered by preference rank
};

struct Drone {
    std::string id;
    double capacity_kg = 0.0;
    double trip_range_km = 0.0;
    double daily_range_km = 0.0;
    double shift_start_min = 0.0;
    double shift_end_min = 0.0;
    double speed_kmh = 0.0;
    double initial_cost = 0.0;
};

/// Dense directed distance table over location ids (customers and depots).
/// Asymmetric entries are allowed; the diagonal must be zero.
class DistanceMatrix {
  public:
    DistanceMatrix() = default;

    explicit DistanceMatrix(std::vector<std::string> location_ids)
        : ids_(std::move(location_ids)), km_(ids_.size() * ids_.size(), nan_) {
        for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < ids_.size(); ++i) km_[i * ids_.size() + i] = 0.0;
    }

    void set(const std::string& from, const std::string& to, double km) {
        km_[offset(from, to)] = km;
    }

    double km(const std::string& from, const std::string& to) const {
        double v = km_[offset(from, to)];
        if (std::isnan(v))
            throw std::out_of_range("distance " + from + " -> " + to + " not provided");
        return v;
    }

    bool has(const std::string& from, const std::string& to) const {
        auto f = index_.find(from);
        auto t = index_.find(to);
        if (f == index_.end() || t == index_.end()) return false;
        return !std::isnan(km_[static_cast<std::size_t>(f->second) * ids_.size() +
                               static_cast<std::size_t>(t->second)]);
    }

    bool knows(const std::string& id) const { return index_.count(id) > 0; }
    const std::vector<std::string>& location_ids() const { return ids_; }

  private:
    static constexpr double nan_ = std::numeric_limits<double>::quiet_NaN();

    std::size_t offset(const std::string& from, const std::string& to) const {
        auto f = index_.find(from);
        auto t = index_.find(to);
        if (f == index_.end()) throw std::out_of_range("unknown location id " + from);
        if (t == index_.end()) throw std::out_of_range("unknown location id " + to);
        return static_cast<std::size_t>(f->second) * ids_.size() +
               static_cast<std::size_t>(t->second);
    }

    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
    std::vector<double> km_;
};

/// One takeoff scenario: per-drone flags, 1 = the drone cannot leave the depot.
struct TakeoffScenario {
    double probability = 0.0;
    std::vector<std::uint8_t> cannot_takeoff;  // indexed like Instance::drones
};

/// One breakdown scenario: per-(customer, drone) flags, 1 = the drone breaks
/// down while serving that customer.
struct BreakdownScenario {
    double probability = 0.0;
    std::vector<std::uint8_t> breaks;  // row-major customer x drone

    std::uint8_t at(int customer, int drone, int num_drones) const {
        return breaks[static_cast<std::size_t>(customer) * num_drones + drone];
    }
};

struct ScenarioSet {
    std::vector<TakeoffScenario> takeoff;
    std::vector<BreakdownScenario> breakdown;
};

struct CostRewardParams {
    std::vector<double> outsource_cost;     // per customer, aligned with Instance::customers
    std::vector<double> transfer_cost;      // per depot, aligned with Instance::depots
    double routing_rate_per_km = 0.105;     // currency charged per flown km
    std::vector<double> window_rewards;     // by rank, strictly decreasing
};

/// Full problem input. Immutable once constructed; safe to share across
/// concurrent solver workers.
struct Instance {
    std::vector<Customer> customers;
    std::vector<std::string> depots;
    std::vector<Drone> drones;
    DistanceMatrix distances;
    ScenarioSet scenarios;
    CostRewardParams costs;

    int num_customers() const { return static_cast<int>(customers.size()); }
    int num_depots() const { return static_cast<int>(depots.size()); }
    int num_drones() const { return static_cast<int>(drones.size()); }

    /// Highest window rank used by any customer (the size of the rank set).
    int num_window_ranks() const {
        int f = 0;
        for (const auto& c : customers)
            for (const auto& w : c.windows) f = std::max(f, w.rank);
        return f;
    }

    int customer_index(const std::string& id) const { return find(customers, id); }

    int depot_index(const std::string& id) const {
        for (std::size_t p = 0; p < depots.size(); ++p)
            if (depots[p] == id) return static_cast<int>(p);
        return -1;
    }

    int drone_index(const std::string& id) const { return find(drones, id); }

    /// Round-trip flight distance depot -> customer -> depot in km.
    double round_trip_km(int customer, int depot) const {
        const std::string& c = customers[customer].id;
        const std::string& p = depots[depot];
        return distances.km(p, c) + distances.km(c, p);
    }

    /// Round-trip flight time in minutes for the given drone, serving time
    /// excluded.
    double round_trip_min(int customer, int depot, int drone) const {
        return round_trip_km(customer, depot) / drones[drone].speed_kmh * 60.0;
    }

  private:
    template <class T>
    static int find(const std::vector<T>& v, const std::string& id) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace detail

/// Checks every structural invariant of an instance and returns one message
/// per violation (empty means the instance is well-formed). Pure; never
/// throws on bad data -- violations are data, not faults.
inline std::vector<std::string> validate_instance(const Instance& inst) {
    std::vector<std::string> out;
    auto bad = [&out](const std::string& msg) { out.push_back(msg); };

    // Duplicate customer ids. Two records for the same customer amount to
    // two origin depots for one package.
    std::unordered_map<std::string, std::vector<const Customer*>> by_id;
    for (const auto& c : inst.customers) by_id[c.id].push_back(&c);
    for (const auto& [id, rows] : by_id) {
        if (rows.size() < 2) continue;
        bool same_origin = true;
        for (const auto* c : rows) same_origin = same_origin && c->origin_depot == rows[0]->origin_depot;
        if (same_origin)
            bad("customer " + id + ": duplicate record");
        else
            bad("customer " + id + ": more than one origin depot (exactly one is required)");
    }

    for (const auto& c : inst.customers) {
        if (!(c.weight_kg > 0.0)) bad("customer " + c.id + ": weight must be > 0");
        if (c.serving_time_min < 0.0) bad("customer " + c.id + ": serving time must be >= 0");
        if (inst.depot_index(c.origin_depot) < 0)
            bad("customer " + c.id + ": origin depot " + c.origin_depot + " is not a depot");
        int prev_rank = 0;
        for (const auto& w : c.windows) {
            if (w.rank < 1) bad("customer " + c.id + ": window rank must be >= 1");
            if (!(w.start_min < w.end_min))
                bad("customer " + c.id + ": window rank " + std::to_string(w.rank) +
                    " must have start < end");
            if (w.rank <= prev_rank)
                bad("customer " + c.id + ": windows must be ordered by increasing rank");
            prev_rank = w.rank;
        }
    }

    {
        std::unordered_map<std::string, int> seen;
        for (const auto& p : inst.depots)
            if (++seen[p] == 2) bad("depot " + p + ": duplicate id");
    }

    for (const auto& d : inst.drones) {
        auto positive = [&](double v, const char* what) {
            if (!(v > 0.0)) bad("drone " + d.id + ": " + what + " must be > 0");
        };
        positive(d.capacity_kg, "capacity");
        positive(d.trip_range_km, "trip range");
        positive(d.daily_range_km, "daily range");
        positive(d.speed_kmh, "speed");
        positive(d.initial_cost, "initial cost");
        if (!(d.shift_start_min < d.shift_end_min))
            bad("drone " + d.id + ": shift start must precede shift end");
    }
    {
        std::unordered_map<std::string, int> seen;
        for (const auto& d : inst.drones)
            if (++seen[d.id] == 2) bad("drone " + d.id + ": duplicate id");
    }

    // Distance matrix must cover every ordered pair of known locations,
    // with a zero diagonal and nonnegative entries.
    std::vector<std::string> locations;
    for (const auto& c : inst.customers) locations.push_back(c.id);
    for (const auto& p : inst.depots) locations.push_back(p);
    for (const auto& u : locations) {
        if (!inst.distances.knows(u)) {
            bad("incomplete distance matrix: location " + u + " missing entirely");
            continue;
        }
        for (const auto& v : locations) {
            if (!inst.distances.knows(v)) continue;
            if (!inst.distances.has(u, v)) {
                bad("incomplete distance matrix: missing (" + u + ", " + v + ")");
                continue;
            }
            double km = inst.distances.km(u, v);
            if (u == v && km != 0.0) bad("distance " + u + " -> " + u + " must be 0");
            if (km < 0.0) bad("distance " + u + " -> " + v + " must be >= 0");
        }
    }

    // Scenario sets: probabilities form a distribution, flags cover the
    // full drone / (customer, drone) index ranges.
    auto check_probs = [&](const char* which, double sum, bool any_negative) {
        if (any_negative) bad(std::string(which) + " probabilities must be >= 0");
        if (std::abs(sum - 1.0) > 1e-9)
            bad(std::string(which) + " probabilities sum to " + detail::num(sum));
    };
    {
        double sum = 0.0;
        bool neg = false;
        for (const auto& s : inst.scenarios.takeoff) {
            sum += s.probability;
            neg = neg || s.probability < 0.0;
            if (static_cast<int>(s.cannot_takeoff.size()) != inst.num_drones())
                bad("takeoff scenario flags must cover every drone");
        }
        check_probs("takeoff", sum, neg);
    }
    {
        double sum = 0.0;
        bool neg = false;
        for (const auto& s : inst.scenarios.breakdown) {
            sum += s.probability;
            neg = neg || s.probability < 0.0;
            if (static_cast<int>(s.breaks.size()) !=
                inst.num_customers() * inst.num_drones())
                bad("breakdown scenario flags must cover every (customer, drone) pair");
        }
        check_probs("breakdown", sum, neg);
    }

    if (static_cast<int>(inst.costs.outsource_cost.size()) != inst.num_customers())
        bad("outsource cost must be given for every customer");
    if (static_cast<int>(inst.costs.transfer_cost.size()) != inst.num_depots())
        bad("transfer cost must be given for every depot");
    for (double v : inst.costs.outsource_cost)
        if (v < 0.0) bad("outsource costs must be >= 0");
    for (double v : inst.costs.transfer_cost)
        if (v < 0.0) bad("transfer costs must be >= 0");
    if (inst.costs.routing_rate_per_km < 0.0) bad("routing rate must be >= 0");
    for (std::size_t f = 1; f < inst.costs.window_rewards.size(); ++f)
        if (!(inst.costs.window_rewards[f] < inst.costs.window_rewards[f - 1]))
            bad("window rewards must be strictly decreasing in rank");
    if (inst.num_window_ranks() > static_cast<int>(inst.costs.window_rewards.size()))
        bad("window rewards must cover every rank in use");

    return out;
}

/// Probability of observing takeoff scenario `takeoff_index` together with
/// breakdown scenario `breakdown_index`. The two draws are independent, so
/// the joint is the product of the marginals.
inline double joint_probability(const ScenarioSet& scenarios, int takeoff_index,
                                int breakdown_index) {
    if (takeoff_index < 0 || takeoff_index >= static_cast<int>(scenarios.takeoff.size()))
        throw std::out_of_range("takeoff scenario index out of range");
    if (breakdown_index < 0 ||
        breakdown_index >= static_cast<int>(scenarios.breakdown.size()))
        throw std::out_of_range("breakdown scenario index out of range");
    return scenarios.takeoff[takeoff_index].probability *
           scenarios.breakdown[breakdown_index].probability;
}

/// Routing cost of flying `distance_km`.
inline double routing_cost(const CostRewardParams& params, double distance_km) {
    if (distance_km < 0.0) throw std::invalid_argument("distance must be >= 0");
    return distance_km * params.routing_rate_per_km;
}

}  // namespace droneplan

#endif  // DRONEPLAN_INSTANCE_HPP
