#ifndef DRONEPLAN_IO_HPP
#define DRONEPLAN_IO_HPP

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "droneplan/instance.hpp"
#include "droneplan/milp/solver.hpp"
#include "droneplan/pareto.hpp"
#include "droneplan/schedule.hpp"

namespace droneplan::io {

/// Shortest exact decimal rendering used for every number this module
/// emits, so identical doubles always print identically.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double parsed = std::strtod(buf, nullptr);
    if (parsed == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char probe[64];
            std::snprintf(probe, sizeof probe, "%.*g", prec, v);
            if (std::strtod(probe, nullptr) == v) return probe;
        }
    }
    return buf;
}

namespace detail {

struct CsvRow {
    int line = 0;
    std::vector<std::string> cells;
};

struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

/// Reads a comma-separated table: first line is the header, blank lines
/// are skipped, no quoting. Cell values must not contain commas.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    CsvTable table;
    table.path = path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (table.header.empty())
            table.header = split_cells(line);
        else
            table.rows.push_back({lineno, split_cells(line)});
    }
    if (table.header.empty()) throw std::runtime_error(path + ": empty file");
    return table;
}

inline void require_header(const CsvTable& table, const std::vector<std::string>& want) {
    if (table.header == want) return;
    std::string expected;
    for (const auto& c : want) expected += (expected.empty() ? "" : ",") + c;
    std::string got;
    for (const auto& c : table.header) got += (got.empty() ? "" : ",") + c;
    throw std::runtime_error(table.path + ":1: expected header \"" + expected +
                             "\", found \"" + got + "\"");
}

inline void require_width(const CsvTable& table, const CsvRow& row) {
    if (row.cells.size() != table.header.size())
        throw std::runtime_error(table.path + ":" + std::to_string(row.line) + ": " +
                                 std::to_string(row.cells.size()) + " fields, expected " +
                                 std::to_string(table.header.size()));
}

inline double parse_double(const CsvTable& table, const CsvRow& row, int col) {
    const std::string& cell = row.cells[col];
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size())
        throw std::runtime_error(table.path + ":" + std::to_string(row.line) +
                                 ": cannot parse \"" + cell + "\" in column " +
                                 table.header[col]);
    return v;
}

inline int parse_int(const CsvTable& table, const CsvRow& row, int col) {
    double v = parse_double(table, row, col);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::runtime_error(table.path + ":" + std::to_string(row.line) +
                                 ": expected an integer in column " + table.header[col]);
    return i;
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (known.find(it.key()) == known.end())
            throw std::runtime_error(where + ": unknown key \"" + it.key() + "\"");
}

inline double json_number(const nlohmann::json& obj, const std::string& key,
                          const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw std::runtime_error(where + ": missing numeric field \"" + key + "\"");
    return obj[key].get<double>();
}

}  // namespace detail

/// Loads and validates an instance directory containing customers.csv,
/// windows.csv, depots.csv, drones.csv, distances.csv, scenarios.json and
/// costs.json. Throws std::runtime_error naming the offending file (and
/// line, for tabular inputs) on any defect.
inline Instance load_instance_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
    for (const char* name : {"customers.csv", "windows.csv", "depots.csv", "drones.csv",
                             "distances.csv", "scenarios.json", "costs.json"})
        if (!fs::exists(fs::path(dir) / name))
            throw std::runtime_error(dir + ": missing required file " + name);

    Instance inst;

    {
        detail::CsvTable t = detail::read_csv(at("depots.csv"));
        detail::require_header(t, {"id"});
        for (const auto& row : t.rows) {
            detail::require_width(t, row);
            inst.depots.push_back(row.cells[0]);
        }
    }
    {
        detail::CsvTable t = detail::read_csv(at("customers.csv"));
        detail::require_header(t, {"id", "weight_kg", "serving_time_min", "origin_depot"});
        for (const auto& row : t.rows) {
            detail::require_width(t, row);
            Customer c;
            c.id = row.cells[0];
            c.weight_kg = detail::parse_double(t, row, 1);
            c.serving_time_min = detail::parse_double(t, row, 2);
            c.origin_depot = row.cells[3];
            inst.customers.push_back(std::move(c));
        }
    }
    {
        detail::CsvTable t = detail::read_csv(at("windows.csv"));
        detail::require_header(t, {"customer_id", "rank", "start_min", "end_min"});
        for (const auto& row : t.rows) {
            detail::require_width(t, row);
            bool found = false;
            for (auto& c : inst.customers) {
                if (c.id != row.cells[0]) continue;
                c.windows.push_back({detail::parse_int(t, row, 1),
                                     detail::parse_double(t, row, 2),
                                     detail::parse_double(t, row, 3)});
                found = true;
                break;
            }
            if (!found)
                throw std::runtime_error(t.path + ":" + std::to_string(row.line) +
                                         ": unknown customer \"" + row.cells[0] + "\"");
        }
    }
    {
        detail::CsvTable t = detail::read_csv(at("drones.csv"));
        detail::require_header(t, {"id", "capacity_kg", "trip_range_km", "daily_range_km",
                                   "shift_start_min", "shift_end_min", "speed_kmh",
                                   "initial_cost"});
        for (const auto& row : t.rows) {
            detail::require_width(t, row);
            Drone d;
            d.id = row.cells[0];
            d.capacity_kg = detail::parse_double(t, row, 1);
            d.trip_range_km = detail::parse_double(t, row, 2);
            d.daily_range_km = detail::parse_double(t, row, 3);
            d.shift_start_min = detail::parse_double(t, row, 4);
            d.shift_end_min = detail::parse_double(t, row, 5);
            d.speed_kmh = detail::parse_double(t, row, 6);
            d.initial_cost = detail::parse_double(t, row, 7);
            inst.drones.push_back(std::move(d));
        }
    }
    {
        std::vector<std::string> locations;
        for (const auto& c : inst.customers) locations.push_back(c.id);
        for (const auto& p : inst.depots) locations.push_back(p);
        inst.distances = DistanceMatrix(locations);
        std::set<std::string> known(locations.begin(), locations.end());
        detail::CsvTable t = detail::read_csv(at("distances.csv"));
        detail::require_header(t, {"from_id", "to_id", "km"});
        for (const auto& row : t.rows) {
            detail::require_width(t, row);
            for (int c : {0, 1})
                if (known.find(row.cells[c]) == known.end())
                    throw std::runtime_error(t.path + ":" + std::to_string(row.line) +
                                             ": unknown location \"" + row.cells[c] +
                                             "\"");
            inst.distances.set(row.cells[0], row.cells[1],
                               detail::parse_double(t, row, 2));
        }
    }
    {
        const std::string path = at("scenarios.json");
        nlohmann::json j = detail::read_json(path);
        detail::reject_unknown_keys(j, {"takeoff", "breakdown"}, path);
        if (!j.contains("takeoff") || !j["takeoff"].is_array() ||
            !j.contains("breakdown") || !j["breakdown"].is_array())
            throw std::runtime_error(path + ": expected arrays \"takeoff\" and \"breakdown\"");
        auto drone_index = [&](const std::string& id) {
            for (std::size_t d = 0; d < inst.drones.size(); ++d)
                if (inst.drones[d].id == id) return static_cast<int>(d);
            throw std::runtime_error(path + ": unknown drone \"" + id + "\"");
        };
        auto customer_index = [&](const std::string& id) {
            for (std::size_t c = 0; c < inst.customers.size(); ++c)
                if (inst.customers[c].id == id) return static_cast<int>(c);
            throw std::runtime_error(path + ": unknown customer \"" + id + "\"");
        };
        for (const auto& s : j["takeoff"]) {
            detail::reject_unknown_keys(s, {"p", "cannot_takeoff"}, path);
            TakeoffScenario sc;
            sc.probability = detail::json_number(s, "p", path);
            sc.cannot_takeoff.assign(inst.drones.size(), 0);
            if (!s.contains("cannot_takeoff") || !s["cannot_takeoff"].is_array())
                throw std::runtime_error(path + ": takeoff entry needs a \"cannot_takeoff\" array");
            for (const auto& id : s["cannot_takeoff"])
                sc.cannot_takeoff[drone_index(id.get<std::string>())] = 1;
            inst.scenarios.takeoff.push_back(std::move(sc));
        }
        for (const auto& s : j["breakdown"]) {
            detail::reject_unknown_keys(s, {"p", "breaks"}, path);
            BreakdownScenario sc;
            sc.probability = detail::json_number(s, "p", path);
            sc.breaks.assign(inst.customers.size() * inst.drones.size(), 0);
            if (!s.contains("breaks") || !s["breaks"].is_array())
                throw std::runtime_error(path + ": breakdown entry needs a \"breaks\" array");
            for (const auto& b : s["breaks"]) {
                detail::reject_unknown_keys(b, {"drone", "customer"}, path);
                int d = drone_index(b.at("drone").get<std::string>());
                int c = customer_index(b.at("customer").get<std::string>());
                sc.breaks[static_cast<std::size_t>(c) * inst.drones.size() + d] = 1;
            }
            inst.scenarios.breakdown.push_back(std::move(sc));
        }
    }
    {
        const std::string path = at("costs.json");
        nlohmann::json j = detail::read_json(path);
        detail::reject_unknown_keys(j,
                                    {"outsource_per_customer", "transfer_per_depot",
                                     "routing_rate_per_km", "window_rewards"},
                                    path);
        auto spread = [&](const char* key, const std::vector<std::string>& ids) {
            if (!j.contains(key))
                throw std::runtime_error(path + ": missing field \"" + key + "\"");
            const nlohmann::json& v = j[key];
            std::vector<double> out;
            if (v.is_number()) {
                out.assign(ids.size(), v.get<double>());
            } else if (v.is_object()) {
                for (const auto& id : ids) {
                    if (!v.contains(id) || !v[id].is_number())
                        throw std::runtime_error(path + ": \"" + key +
                                                 "\" misses an entry for \"" + id + "\"");
                    out.push_back(v[id].get<double>());
                }
                if (v.size() != ids.size())
                    throw std::runtime_error(path + ": \"" + key +
                                             "\" names an unknown id");
            } else {
                throw std::runtime_error(path + ": \"" + key +
                                         "\" must be a number or an id map");
            }
            return out;
        };
        std::vector<std::string> customer_ids;
        for (const auto& c : inst.customers) customer_ids.push_back(c.id);
        inst.costs.outsource_cost = spread("outsource_per_customer", customer_ids);
        inst.costs.transfer_cost = spread("transfer_per_depot", inst.depots);
        inst.costs.routing_rate_per_km = detail::json_number(j, "routing_rate_per_km", path);
        if (!j.contains("window_rewards") || !j["window_rewards"].is_array())
            throw std::runtime_error(path + ": missing array \"window_rewards\"");
        for (const auto& r : j["window_rewards"]) {
            if (!r.is_number())
                throw std::runtime_error(path + ": window_rewards must hold numbers");
            inst.costs.window_rewards.push_back(r.get<double>());
        }
    }

    auto violations = validate_instance(inst);
    if (!violations.empty()) {
        std::string msg = dir + ": invalid instance";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw std::runtime_error(msg);
    }
    return inst;
}

inline nlohmann::json objectives_to_json(const ObjectiveVector& v) {
    return nlohmann::json{{"total_cost", v.total_cost},
                          {"unsuccessful_pct", v.unsuccessful_pct},
                          {"reward", v.reward}};
}

/// Serializes a schedule (with its exact objective vector) to JSON. Ids
/// are used instead of indices so the file stands on its own.
inline nlohmann::json schedule_to_json(const Instance& inst, const Schedule& sched,
                                       const ObjectiveVector& objectives) {
    nlohmann::json customers = nlohmann::json::array();
    for (std::size_t i = 0; i < sched.customers.size(); ++i) {
        const CustomerPlan& p = sched.customers[i];
        nlohmann::json c{{"id", inst.customers[i].id}};
        if (p.outsourced) {
            c["mode"] = "outsourced";
        } else {
            c["mode"] = "drone";
            c["drone"] = inst.drones[p.drone].id;
            c["depot"] = inst.depots[p.depot];
            c["start_min"] = p.start_min;
            if (p.window_rank != 0) c["window_rank"] = p.window_rank;
        }
        customers.push_back(std::move(c));
    }
    nlohmann::json order = nlohmann::json::object();
    for (std::size_t d = 0; d < sched.serving_order.size(); ++d) {
        nlohmann::json list = nlohmann::json::array();
        for (int i : sched.serving_order[d]) list.push_back(inst.customers[i].id);
        order[inst.drones[d].id] = std::move(list);
    }
    return nlohmann::json{{"customers", std::move(customers)},
                          {"serving_order", std::move(order)},
                          {"objectives", objectives_to_json(objectives)}};
}

/// Parses a schedule written by schedule_to_json against the instance it
/// belongs to. The stored objectives are ignored; callers re-evaluate.
inline Schedule schedule_from_json(const nlohmann::json& j, const Instance& inst,
                                   const std::string& where = "schedule") {
    auto fail = [&](const std::string& msg) -> void {
        throw std::runtime_error(where + ": " + msg);
    };
    Schedule sched;
    sched.customers.assign(inst.customers.size(), CustomerPlan{});
    sched.serving_order.assign(inst.drones.size(), std::vector<int>{});
    if (!j.contains("customers") || !j["customers"].is_array())
        fail("missing array \"customers\"");
    std::vector<bool> seen(inst.customers.size(), false);
    for (const auto& c : j["customers"]) {
        std::string id = c.at("id").get<std::string>();
        int i = -1;
        for (std::size_t k = 0; k < inst.customers.size(); ++k)
            if (inst.customers[k].id == id) i = static_cast<int>(k);
        if (i < 0) fail("unknown customer \"" + id + "\"");
        if (seen[i]) fail("customer \"" + id + "\" listed twice");
        seen[i] = true;
        std::string mode = c.at("mode").get<std::string>();
        CustomerPlan& plan = sched.customers[i];
        if (mode == "outsourced") {
            plan = CustomerPlan{};
        } else if (mode == "drone") {
            plan.outsourced = false;
            std::string drone = c.at("drone").get<std::string>();
            plan.drone = -1;
            for (std::size_t d = 0; d < inst.drones.size(); ++d)
                if (inst.drones[d].id == drone) plan.drone = static_cast<int>(d);
            if (plan.drone < 0) fail("unknown drone \"" + drone + "\"");
            std::string depot = c.at("depot").get<std::string>();
            plan.depot = -1;
            for (std::size_t p = 0; p < inst.depots.size(); ++p)
                if (inst.depots[p] == depot) plan.depot = static_cast<int>(p);
            if (plan.depot < 0) fail("unknown depot \"" + depot + "\"");
            plan.start_min = c.at("start_min").get<double>();
            plan.window_rank = c.contains("window_rank") ? c["window_rank"].get<int>() : 0;
        } else {
            fail("unknown mode \"" + mode + "\"");
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) fail("customer \"" + inst.customers[i].id + "\" missing");
    if (!j.contains("serving_order") || !j["serving_order"].is_object())
        fail("missing object \"serving_order\"");
    for (auto it = j["serving_order"].begin(); it != j["serving_order"].end(); ++it) {
        int d = -1;
        for (std::size_t k = 0; k < inst.drones.size(); ++k)
            if (inst.drones[k].id == it.key()) d = static_cast<int>(k);
        if (d < 0) fail("unknown drone \"" + it.key() + "\"");
        for (const auto& cid : it.value()) {
            std::string id = cid.get<std::string>();
            int i = -1;
            for (std::size_t k = 0; k < inst.customers.size(); ++k)
                if (inst.customers[k].id == id) i = static_cast<int>(k);
            if (i < 0) fail("unknown customer \"" + id + "\" in serving order");
            sched.serving_order[d].push_back(i);
        }
    }
    return sched;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline void write_schedule_json(const std::string& path, const Instance& inst,
                                const Schedule& sched, const ObjectiveVector& objectives) {
    write_text_file(path, schedule_to_json(inst, sched, objectives).dump(2) + "\n");
}

inline Schedule load_schedule_json(const std::string& path, const Instance& inst) {
    return schedule_from_json(detail::read_json(path), inst, path);
}

/// Writes the sweep table. Columns: the three possible bounds (blank when
/// the axis is absent), solve status, the recomputed objective vector
/// (blank when the cell has no point) and the per-cell schedule file name
/// (blank likewise).
inline void write_pareto_csv(const std::string& path,
                             const std::vector<ParetoPoint>& points,
                             const std::vector<std::string>& schedule_paths = {}) {
    std::ostringstream out;
    out << "eps_u,eps_r,eps_c,status,cost,unsuccessful_pct,reward,schedule_path\n";
    for (std::size_t k = 0; k < points.size(); ++k) {
        const ParetoPoint& p = points[k];
        auto bound = [&](Objective o) {
            const auto& e = p.eps[static_cast<int>(o)];
            return e ? format_double(*e) : std::string();
        };
        out << bound(Objective::UNSUCCESSFUL) << ',' << bound(Objective::REWARD) << ','
            << bound(Objective::COST) << ',' << milp::to_string(p.status) << ',';
        if (p.has_point)
            out << format_double(p.objectives.total_cost) << ','
                << format_double(p.objectives.unsuccessful_pct) << ','
                << format_double(p.objectives.reward) << ',';
        else
            out << ",,,";
        if (k < schedule_paths.size()) out << schedule_paths[k];
        out << '\n';
    }
    write_text_file(path, out.str());
}

/// Writes the three pairwise projections of the frontier as plain
/// two-column tables, rows sorted by the first column.
inline void write_plot_data(const std::string& dir,
                            const std::vector<ParetoPoint>& frontier) {
    namespace fs = std::filesystem;
    struct Axis {
        const char* file;
        const char* header;
        Objective x, y;
    };
    const Axis axes[] = {
        {"plot_unsuccessful_cost.csv", "unsuccessful_pct,cost", Objective::UNSUCCESSFUL,
         Objective::COST},
        {"plot_reward_cost.csv", "reward,cost", Objective::REWARD, Objective::COST},
        {"plot_reward_unsuccessful.csv", "reward,unsuccessful_pct", Objective::REWARD,
         Objective::UNSUCCESSFUL},
    };
    for (const Axis& axis : axes) {
        std::vector<std::pair<double, double>> rows;
        for (const auto& p : frontier)
            if (p.has_point)
                rows.push_back({value_of(p.objectives, axis.x),
                                value_of(p.objectives, axis.y)});
        std::sort(rows.begin(), rows.end());
        std::ostringstream out;
        out << axis.header << '\n';
        for (const auto& [x, y] : rows)
            out << format_double(x) << ',' << format_double(y) << '\n';
        write_text_file((fs::path(dir) / axis.file).string(), out.str());
    }
}

/// Everything one CLI invocation needs, assembled from flags.
struct RunConfig {
    std::string instance_dir;
    ObjectiveSelection selection;
    int eps_u_steps = 20;
    int eps_r_steps = 20;
    int eps_c_steps = 20;
    milp::SolverParams solver;
    std::string out_dir = ".";
    long long samples = 100000;
    std::uint64_t seed = 1;
};

}  // namespace droneplan::io

#endif  // DRONEPLAN_IO_HPP
