#ifndef DRONEPLAN_MILP_MODEL_HPP
#define DRONEPLAN_MILP_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace droneplan::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { CONTINUOUS, INTEGER, BINARY };
enum class Relation { LESS_EQUAL, GREATER_EQUAL, EQUAL };
enum class Sense { MINIMIZE, MAXIMIZE };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
    VarKind kind = VarKind::CONTINUOUS;
};

/// One coefficient of a row or of the objective.
struct LinearTerm {
    int var = -1;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Relation relation = Relation::LESS_EQUAL;
    double rhs = 0.0;
};

/// Sparse mixed-integer linear program. Rows and columns keep the order in
/// which they were added; nothing is simplified behind the caller's back.
struct MILPModel {
    Sense sense = Sense::MINIMIZE;
    std::string objective_name = "obj";
    std::vector<LinearTerm> objective;
    double objective_constant = 0.0;
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;
    /// Optional per-variable branching priority: columns in a lower class are
    /// branched on before any column of a higher class becomes eligible.
    /// Empty means all columns share one class. Entries beyond the vector's
    /// size default to class 0.
    std::vector<int> branch_priority;

    int add_variable(std::string name, double lower, double upper, VarKind kind) {
        variables.push_back({std::move(name), lower, upper, kind});
        return static_cast<int>(variables.size()) - 1;
    }

    int add_constraint(std::string name, std::vector<LinearTerm> terms, Relation rel,
                       double rhs) {
        constraints.push_back({std::move(name), std::move(terms), rel, rhs});
        return static_cast<int>(constraints.size()) - 1;
    }

    int num_variables() const { return static_cast<int>(variables.size()); }
    int num_constraints() const { return static_cast<int>(constraints.size()); }

    int variable_index(const std::string& name) const {
        for (std::size_t j = 0; j < variables.size(); ++j)
            if (variables[j].name == name) return static_cast<int>(j);
        return -1;
    }

    /// Structural well-formedness; one message per defect, empty when valid.
    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        std::unordered_set<std::string> names;
        for (const auto& v : variables) {
            if (v.name.empty()) out.push_back("variable with empty name");
            if (!names.insert(v.name).second)
                out.push_back("duplicate variable name " + v.name);
            if (std::isnan(v.lower) || std::isnan(v.upper))
                out.push_back("variable " + v.name + ": NaN bound");
            else if (v.lower > v.upper)
                out.push_back("variable " + v.name + ": lower bound exceeds upper bound");
            if (v.kind == VarKind::BINARY && (v.lower < 0.0 || v.upper > 1.0))
                out.push_back("variable " + v.name + ": binary bounds outside [0, 1]");
        }
        std::unordered_set<std::string> row_names;
        auto check_terms = [&](const std::vector<LinearTerm>& terms, const std::string& where) {
            for (const auto& t : terms) {
                if (t.var < 0 || t.var >= num_variables())
                    out.push_back(where + ": term references unknown variable index " +
                                  std::to_string(t.var));
                if (!std::isfinite(t.coef))
                    out.push_back(where + ": non-finite coefficient");
            }
        };
        check_terms(objective, "objective");
        for (const auto& c : constraints) {
            if (c.name.empty()) out.push_back("constraint with empty name");
            if (!row_names.insert(c.name).second)
                out.push_back("duplicate constraint name " + c.name);
            check_terms(c.terms, "constraint " + c.name);
            if (!std::isfinite(c.rhs))
                out.push_back("constraint " + c.name + ": non-finite right-hand side");
        }
        return out;
    }
};

enum class SolveStatus { OPTIMAL, INFEASIBLE, UNBOUNDED, NODE_LIMIT, TIME_LIMIT };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::OPTIMAL: return "OPTIMAL";
        case SolveStatus::INFEASIBLE: return "INFEASIBLE";
        case SolveStatus::UNBOUNDED: return "UNBOUNDED";
        case SolveStatus::NODE_LIMIT: return "NODE_LIMIT";
        case SolveStatus::TIME_LIMIT: return "TIME_LIMIT";
    }
    return "?";
}

struct SolveResult {
    SolveStatus status = SolveStatus::INFEASIBLE;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double best_bound = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values;     // per variable; empty when no solution exists
    std::vector<double> row_duals;  // per constraint; LP solves only
    long nodes = 0;                 // branch-and-bound nodes processed
    long iterations = 0;            // simplex pivots, all phases combined
    double wall_seconds = 0.0;

    bool has_solution() const { return !values.empty(); }
};

struct SolverParams {
    double feasibility_tol = 1e-7;
    double integrality_tol = 1e-6;
    double relative_gap = 1e-6;
    long node_limit = 0;       // 0 = unlimited
    double time_limit_s = 0;   // 0 = unlimited
    enum class Branching { MOST_FRACTIONAL, PSEUDO_COST } branching = Branching::MOST_FRACTIONAL;
    std::uint64_t seed = 0;    // reserved for randomized components; kept in
                               // the determinism contract
    /// Optional primal heuristic consulted at branch-and-bound nodes. It
    /// receives the node relaxation's variable values and may rewrite them
    /// into a candidate integral point; returning true submits the point to
    /// the usual incumbent feasibility/objective checks. Must be
    /// deterministic for the determinism contract to hold.
    std::function<bool(std::vector<double>&)> polish;
};

}  // namespace droneplan::milp

#endif  // DRONEPLAN_MILP_MODEL_HPP
