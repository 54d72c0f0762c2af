// Command-line front end: solve, scan, evaluate, simulate, export-lp,
// payoff. Exit codes: 0 success, 1 infeasible primary solve, 2 input or
// usage error.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droneplan/evaluator.hpp"
#include "droneplan/formulation.hpp"
#include "droneplan/io.hpp"
#include "droneplan/milp/lp_format.hpp"
#include "droneplan/milp/solver.hpp"
#include "droneplan/oracle.hpp"
#include "droneplan/pareto.hpp"

namespace {

using namespace droneplan;

int log_level() {
    const char* env = std::getenv("DRONEPLAN_LOG");
    if (env == nullptr) return 1;
    std::string v = env;
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

std::string objectives_line(const ObjectiveVector& v) {
    return "cost=" + io::format_double(v.total_cost) +
           " unsuccessful_pct=" + io::format_double(v.unsuccessful_pct) +
           " reward=" + io::format_double(v.reward);
}

Objective parse_objective(const std::string& name) {
    if (name == "cost") return Objective::COST;
    if (name == "unsuccessful") return Objective::UNSUCCESSFUL;
    if (name == "reward") return Objective::REWARD;
    throw CLI::ValidationError("--primary",
                               "must be one of: cost, unsuccessful, reward");
}

struct CommonFlags {
    std::string instance_dir;
    std::string primary = "cost";
    std::optional<double> eps_u, eps_r, eps_c;
    milp::SolverParams solver;

    void attach_instance(CLI::App* cmd) {
        cmd->add_option("-i,--instance", instance_dir, "instance directory")
            ->required();
    }
    void attach_selection(CLI::App* cmd) {
        cmd->add_option("--primary", primary,
                        "objective to optimize: cost, unsuccessful, reward");
        cmd->add_option("--eps-u", eps_u, "upper bound on unsuccessful_pct");
        cmd->add_option("--eps-r", eps_r, "lower bound on reward");
        cmd->add_option("--eps-c", eps_c, "upper bound on cost");
    }
    void attach_solver(CLI::App* cmd) {
        cmd->add_option("--seed", solver.seed, "deterministic solver seed");
        cmd->add_option("--time-limit-s", solver.time_limit_s,
                        "wall-clock limit per solve, seconds (0 = none)");
        cmd->add_option("--node-limit", solver.node_limit,
                        "search node limit per solve (0 = none)");
    }
    ObjectiveSelection selection() const {
        ObjectiveSelection sel;
        sel.primary = parse_objective(primary);
        sel.max_unsuccessful_pct = eps_u;
        sel.min_reward = eps_r;
        sel.max_cost = eps_c;
        return sel;
    }
};

int run_solve(const CommonFlags& flags, const std::string& out_dir) {
    Instance inst = io::load_instance_dir(flags.instance_dir);
    milp::MILPModel model = build_milp(inst, flags.selection());
    log_info("solving " + std::to_string(model.variables.size()) + " columns, " +
             std::to_string(model.constraints.size()) + " rows");
    milp::SolverParams run = flags.solver;
    run.polish = make_schedule_polish(inst);
    milp::SolveResult res = milp::solve_mip(model, run);
    std::cout << "status=" << milp::to_string(res.status) << "\n";
    if (!res.has_solution()) return 1;
    Schedule sched = decode_schedule(inst, res.values);
    ObjectiveVector obj = evaluate_schedule(inst, sched);
    std::filesystem::create_directories(out_dir);
    std::string path = (std::filesystem::path(out_dir) / "schedule.json").string();
    io::write_schedule_json(path, inst, sched, obj);
    std::cout << objectives_line(obj) << "\n";
    std::cout << "schedule=" << path << "\n";
    return 0;
}

int run_scan(const CommonFlags& flags, const std::string& out_dir, int eps_u_steps,
             int eps_r_steps, int eps_c_steps) {
    Instance inst = io::load_instance_dir(flags.instance_dir);
    Objective primary = parse_objective(flags.primary);
    log_info("building payoff table (3 solves)");
    PayoffTable payoff = payoff_table(inst, flags.solver);
    auto steps_for = [&](Objective o) {
        switch (o) {
            case Objective::COST: return eps_c_steps;
            case Objective::UNSUCCESSFUL: return eps_u_steps;
            case Objective::REWARD: return eps_r_steps;
        }
        return 1;
    };
    EpsilonGrid grid = default_grid(payoff, primary);
    for (auto& axis : grid.axes) axis.steps = steps_for(axis.objective);

    std::size_t cells = 1;
    for (const auto& axis : grid.axes) cells *= static_cast<std::size_t>(axis.steps);
    log_info("scanning " + std::to_string(cells) + " grid cells");
    std::vector<ParetoPoint> points = scan(inst, grid, flags.solver);

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> schedule_paths(points.size());
    int width = points.size() > 999 ? 4 : 3;
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!points[k].has_point) continue;
        char name[40];
        std::snprintf(name, sizeof name, "schedule_%0*zu.json", width, k);
        schedule_paths[k] = name;
        io::write_schedule_json((std::filesystem::path(out_dir) / name).string(), inst,
                                points[k].schedule, points[k].objectives);
    }
    io::write_pareto_csv((std::filesystem::path(out_dir) / "pareto.csv").string(),
                         points, schedule_paths);

    std::vector<ParetoPoint> frontier = filter_nondominated(points);
    std::vector<std::string> frontier_paths;
    for (const auto& f : frontier)
        for (std::size_t k = 0; k < points.size(); ++k)
            if (points[k].has_point && f.eps == points[k].eps &&
                f.objectives.total_cost == points[k].objectives.total_cost &&
                f.objectives.unsuccessful_pct == points[k].objectives.unsuccessful_pct &&
                f.objectives.reward == points[k].objectives.reward) {
                frontier_paths.push_back(schedule_paths[k]);
                break;
            }
    io::write_pareto_csv((std::filesystem::path(out_dir) / "pareto_front.csv").string(),
                         frontier, frontier_paths);
    io::write_plot_data(out_dir, frontier);

    std::cout << "cells=" << points.size() << " frontier=" << frontier.size() << "\n";
    std::cout << "pareto=" << (std::filesystem::path(out_dir) / "pareto.csv").string()
              << "\n";
    return 0;
}

int run_evaluate(const std::string& instance_dir, const std::string& schedule_path) {
    Instance inst = io::load_instance_dir(instance_dir);
    Schedule sched = io::load_schedule_json(schedule_path, inst);
    std::cout << objectives_line(evaluate_schedule(inst, sched)) << "\n";
    return 0;
}

int run_simulate(const std::string& instance_dir, const std::string& schedule_path,
                 long samples, std::uint64_t seed) {
    Instance inst = io::load_instance_dir(instance_dir);
    Schedule sched = io::load_schedule_json(schedule_path, inst);
    MonteCarloResult mc = monte_carlo_unsuccessful(inst, sched, samples, seed);
    std::cout << "estimate_pct=" << io::format_double(mc.estimate_pct)
              << " stderr_pct=" << io::format_double(mc.stderr_pct)
              << " samples=" << mc.samples << "\n";
    return 0;
}

int run_export_lp(const CommonFlags& flags, const std::string& out_path) {
    Instance inst = io::load_instance_dir(flags.instance_dir);
    milp::MILPModel model = build_milp(inst, flags.selection());
    io::write_text_file(out_path, milp::export_lp_text(model));
    std::cout << "lp=" << out_path << " columns=" << model.variables.size()
              << " rows=" << model.constraints.size() << "\n";
    return 0;
}

int run_payoff(const CommonFlags& flags) {
    Instance inst = io::load_instance_dir(flags.instance_dir);
    PayoffTable table = payoff_table(inst, flags.solver);
    for (int k = 0; k < 3; ++k) {
        Objective o = static_cast<Objective>(k);
        std::cout << "payoff " << to_string(o) << ": " << objectives_line(table.at(o))
                  << "\n";
    }
    for (int k = 0; k < 3; ++k) {
        Objective o = static_cast<Objective>(k);
        std::cout << "range " << to_string(o) << ": best="
                  << io::format_double(table.best(o))
                  << " worst=" << io::format_double(table.worst(o)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drone delivery scheduling: stochastic MILP solver and "
                 "multi-objective sweep"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    std::string solve_out = ".";
    CLI::App* solve_cmd = app.add_subcommand("solve", "optimize one objective selection");
    solve_flags.attach_instance(solve_cmd);
    solve_flags.attach_selection(solve_cmd);
    solve_flags.attach_solver(solve_cmd);
    solve_cmd->add_option("-o,--out-dir", solve_out, "directory for schedule.json");

    CommonFlags scan_flags;
    std::string scan_out = ".";
    int eps_u_steps = 20, eps_r_steps = 20, eps_c_steps = 20;
    CLI::App* scan_cmd =
        app.add_subcommand("scan", "sweep bound grids and write the frontier");
    scan_flags.attach_instance(scan_cmd);
    scan_cmd->add_option("--primary", scan_flags.primary,
                         "objective to optimize: cost, unsuccessful, reward");
    scan_flags.attach_solver(scan_cmd);
    scan_cmd->add_option("--eps-u-steps", eps_u_steps, "grid steps for the bound on "
                                                       "unsuccessful_pct");
    scan_cmd->add_option("--eps-r-steps", eps_r_steps, "grid steps for the reward bound");
    scan_cmd->add_option("--eps-c-steps", eps_c_steps, "grid steps for the cost bound");
    scan_cmd->add_option("-o,--out-dir", scan_out, "directory for pareto.csv and friends");

    std::string eval_instance, eval_schedule;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "recompute the objectives of a schedule.json");
    eval_cmd->add_option("-i,--instance", eval_instance, "instance directory")->required();
    eval_cmd->add_option("-s,--schedule", eval_schedule, "schedule.json path")->required();

    std::string sim_instance, sim_schedule;
    long sim_samples = 100000;
    std::uint64_t sim_seed = 1;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "Monte Carlo estimate of unsuccessful_pct");
    sim_cmd->add_option("-i,--instance", sim_instance, "instance directory")->required();
    sim_cmd->add_option("-s,--schedule", sim_schedule, "schedule.json path")->required();
    sim_cmd->add_option("--samples", sim_samples, "sample count");
    sim_cmd->add_option("--seed", sim_seed, "stream seed");

    CommonFlags export_flags;
    std::string export_out = "model.lp";
    CLI::App* export_cmd = app.add_subcommand("export-lp", "write the model as .lp text");
    export_flags.attach_instance(export_cmd);
    export_flags.attach_selection(export_cmd);
    export_cmd->add_option("-o,--out", export_out, "output .lp path");

    CommonFlags payoff_flags;
    CLI::App* payoff_cmd =
        app.add_subcommand("payoff", "single-objective optima and sweep ranges");
    payoff_flags.attach_instance(payoff_cmd);
    payoff_flags.attach_solver(payoff_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_flags, solve_out);
        if (scan_cmd->parsed())
            return run_scan(scan_flags, scan_out, eps_u_steps, eps_r_steps, eps_c_steps);
        if (eval_cmd->parsed()) return run_evaluate(eval_instance, eval_schedule);
        if (sim_cmd->parsed())
            return run_simulate(sim_instance, sim_schedule, sim_samples, sim_seed);
        if (export_cmd->parsed()) return run_export_lp(export_flags, export_out);
        if (payoff_cmd->parsed()) return run_payoff(payoff_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
