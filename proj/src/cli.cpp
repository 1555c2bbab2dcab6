#include "tsc/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsc/io.hpp"
#include "tsc/legality.hpp"
#include "tsc/milp.hpp"
#include "tsc/sim.hpp"

namespace tsc::cli {

namespace {

struct Common {
    std::string scenario;
    std::optional<int> horizon;
    std::optional<int> duration;
    std::optional<std::uint64_t> seed;
    int seeds = 1;
    std::string weights;
};

void add_common(CLI::App& cmd, Common& c) {
    cmd.add_option("--scenario", c.scenario, "Scenario JSON file (default: built-in 4-way)");
    cmd.add_option("--horizon", c.horizon, "Prediction horizon P")->check(CLI::PositiveNumber);
    cmd.add_option("--duration", c.duration, "Simulated seconds")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", c.seed, "First seed");
    cmd.add_option("--seeds", c.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    cmd.add_option("--weights", c.weights, "Objective weights w_q,w_tw,w_s,w_f,w_ng");
}

io::ScenarioFile load(const Common& c) {
    io::ScenarioFile f = c.scenario.empty() ? io::builtin_scenario() : io::load_scenario(c.scenario);
    if (c.horizon) f.mpc.prediction_horizon = *c.horizon;
    if (c.duration) f.scenario.duration_s = *c.duration;
    if (c.seed) f.scenario.seed = *c.seed;
    if (!c.weights.empty()) f.mpc.weights = io::parse_weights(c.weights);
    return f;
}

std::vector<std::uint64_t> seed_list(const io::ScenarioFile& f, const Common& c) {
    std::vector<std::uint64_t> out;
    for (int k = 0; k < c.seeds; ++k) out.push_back(f.scenario.seed + static_cast<std::uint64_t>(k));
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io::ConfigError("cannot write " + path);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

struct RunArgs {
    Common common;
    std::vector<std::string> controllers;
    std::vector<int> control_horizons;
    std::string out_csv;
    std::string out_json;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
    io::ScenarioFile f = load(a.common);
    std::vector<std::string> controllers = a.controllers;
    if (controllers.empty()) controllers.push_back(f.controller);
    std::vector<int> horizons = a.control_horizons;
    if (horizons.empty()) horizons.push_back(f.mpc.control_horizon);

    struct Variant {
        std::string label;
        sim::Controller controller;
        int P = 0, C = 0;
    };
    std::vector<Variant> variants;
    for (const auto& name : controllers) {
        if (name == "timed") {
            if (f.time_program.phases.empty()) throw io::ConfigError("scenario has no time_program");
            variants.push_back({"timed", f.time_program, 0, 0});
            continue;
        }
        for (int C : horizons) {
            MpcConfig m = f.mpc;
            m.control_horizon = C;
            try {
                validate(m);
            } catch (const std::invalid_argument& e) {
                throw io::ConfigError(e.what());
            }
            variants.push_back({"mpc", m, m.prediction_horizon, C});
        }
    }

    std::vector<io::RunRecord> records;
    for (std::uint64_t seed : seed_list(f, a.common)) {
        for (const auto& v : variants) {
            sim::ScenarioConfig s = f.scenario;
            s.seed = seed;
            const auto result = sim::run(s, v.controller);
            records.push_back({s.name, v.label, seed, v.P, v.C, result.metrics});
        }
    }

    if (!a.out_csv.empty()) {
        auto csv = open_out(a.out_csv);
        io::write_csv_header(csv);
        for (const auto& r : records) io::write_csv_row(csv, r);
    }
    if (!a.out_json.empty()) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& r : records) runs.push_back(io::to_json(r));
        auto js = open_out(a.out_json);
        js << nlohmann::json{{"runs", runs}}.dump(2) << '\n';
    }

    // Summary per controller, averaged over seeds.
    out << "controller         runs   avg TL [s]   p95 TL [s]     stops\n";
    for (const auto& v : variants) {
        std::vector<double> avg, p95, stops;
        for (const auto& r : records) {
            if (r.controller == v.label && r.C == v.C) {
                avg.push_back(r.metrics.avg_time_loss_s);
                p95.push_back(r.metrics.p95_time_loss_s);
                stops.push_back(static_cast<double>(r.metrics.stops));
            }
        }
        std::string label = v.label == "timed" ? "time program"
                                               : "mpc P=" + std::to_string(v.P) + " C=" + std::to_string(v.C);
        label.resize(18, ' ');
        char line[160];
        std::snprintf(line, sizeof line, "%s %5zu %12.2f %12.2f %9.1f\n", label.c_str(), avg.size(), mean_of(avg),
                      mean_of(p95), mean_of(stops));
        out << line;
    }
    return kExitOk;
}

struct BenchArgs {
    Common common;
    std::vector<int> control_horizons;
    std::string out_csv;
    bool paired = false;
    int snapshot_every = 10;
    int repeat = 3;
};

MpcConfig with_control_horizon(MpcConfig m, int C) {
    m.control_horizon = C;
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        throw io::ConfigError(e.what());
    }
    return m;
}

// Problems logged from the scenario's own MPC loop, re-solved cold at each C.
void bench_paired(const BenchArgs& a, const io::ScenarioFile& f, std::ostream& csv) {
    for (int C : a.control_horizons) with_control_horizon(f.mpc, C);
    std::vector<HorizonProblem> problems;
    sim::RunOptions o;
    o.snapshot_every = a.snapshot_every;
    for (std::uint64_t seed : seed_list(f, a.common)) {
        sim::ScenarioConfig s = f.scenario;
        s.seed = seed;
        auto result = sim::run(s, with_control_horizon(f.mpc, f.mpc.control_horizon), o);
        problems.insert(problems.end(), result.snapshots.begin(), result.snapshots.end());
    }
    csv << "scenario,P,C,problems,mean_solve_ms,sd_solve_ms,max_solve_ms,mean_nodes\n";
    for (int C : a.control_horizons) {
        const auto t = sim::time_cold_solves(problems, C, a.repeat);
        csv << f.scenario.name << ',' << f.mpc.prediction_horizon << ',' << C << ',' << problems.size() << ','
            << io::fixed(t.stats.mean_ms, 4) << ',' << io::fixed(t.stats.sd_ms, 4) << ','
            << io::fixed(t.stats.max_ms, 4) << ',' << io::fixed(t.mean_nodes, 1) << '\n';
    }
}

// One closed loop per C; each row summarizes the solves that loop made.
void bench_closed_loop(const BenchArgs& a, const io::ScenarioFile& f, std::ostream& csv) {
    csv << "scenario,P,C,seeds,solves,mean_solve_ms,sd_solve_ms,max_solve_ms\n";
    for (int C : a.control_horizons) {
        const MpcConfig m = with_control_horizon(f.mpc, C);
        std::vector<double> all;
        const auto seeds = seed_list(f, a.common);
        for (std::uint64_t seed : seeds) {
            sim::ScenarioConfig s = f.scenario;
            s.seed = seed;
            auto result = sim::run(s, m);
            all.insert(all.end(), result.solve_ms.begin(), result.solve_ms.end());
        }
        const auto stats = sim::solve_stats(all);
        csv << f.scenario.name << ',' << m.prediction_horizon << ',' << C << ',' << seeds.size() << ',' << all.size()
            << ',' << io::fixed(stats.mean_ms, 4) << ',' << io::fixed(stats.sd_ms, 4) << ','
            << io::fixed(stats.max_ms, 4) << '\n';
    }
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (a.control_horizons.empty()) throw io::ConfigError("bench needs at least one --control-horizon");
    const io::ScenarioFile f = load(a.common);
    std::ostringstream csv;
    if (a.paired) {
        bench_paired(a, f, csv);
    } else {
        bench_closed_loop(a, f, csv);
    }
    if (a.out_csv.empty()) {
        out << csv.str();
    } else {
        open_out(a.out_csv) << csv.str();
    }
    return kExitOk;
}

struct ExportArgs {
    Common common;
    std::optional<int> control_horizon;
    std::string controller;
    int at_second = 0;
    std::string out_path;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
    io::ScenarioFile f = load(a.common);
    if (a.control_horizon) f.mpc.control_horizon = *a.control_horizon;
    try {
        validate(f.mpc);
    } catch (const std::invalid_argument& e) {
        throw io::ConfigError(e.what());
    }
    const std::string driver = a.controller.empty() ? f.controller : a.controller;
    sim::Controller controller = driver == "timed" ? sim::Controller(f.time_program) : sim::Controller(f.mpc);
    sim::ScenarioConfig s = f.scenario;
    s.duration_s = std::max(s.duration_s, a.at_second + 1);
    sim::Simulation simulation(s, controller);
    while (simulation.time() < a.at_second) simulation.step();
    const HorizonProblem problem = simulation.horizon_problem(f.mpc);
    const milp::Model model = milp::encode(problem);

    std::ofstream file(a.out_path);
    if (!file) throw io::ConfigError("cannot write " + a.out_path);
    const std::size_t bytes = milp::export_lp(model, file);
    out << "wrote " << a.out_path << ": " << model.variables().size() << " variables, "
        << model.constraints().size() << " rows, " << bytes << " bytes\n";
    return kExitOk;
}

struct VerifyArgs {
    std::string schedule;
    std::string scenario;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const IntersectionSpec spec =
        a.scenario.empty() ? builtin_fourway() : io::load_scenario(a.scenario).scenario.spec;
    std::ifstream in(a.schedule);
    if (!in) throw io::ConfigError("cannot open " + a.schedule);
    const auto schedule = io::read_schedule(in, spec.n);
    const auto found = check_schedule(initial_state(spec), schedule, spec);
    for (const auto& v : found) out << describe(v) << '\n';
    out << schedule.size() << " steps, " << found.size() << " violations\n";
    return found.empty() ? kExitOk : kExitViolation;
}

struct ProgramArgs {
    std::string scenario;
    int cycles = 1;
    std::string out_path;
};

int cmd_program(const ProgramArgs& a, std::ostream& out) {
    const io::ScenarioFile f = a.scenario.empty() ? io::builtin_scenario() : io::load_scenario(a.scenario);
    if (f.time_program.phases.empty()) throw io::ConfigError("scenario has no time_program");
    const auto schedule = sim::expand(f.time_program, a.cycles * f.time_program.cycle_length());
    if (a.out_path.empty()) {
        io::write_schedule(out, schedule);
    } else {
        auto file = open_out(a.out_path);
        io::write_schedule(file, schedule);
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Legal-by-construction traffic signal control", "tsc"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Simulate controllers over seeds and report time loss");
    add_common(*run, run_args.common);
    run->add_option("--controller", run_args.controllers, "timed and/or mpc")
        ->check(CLI::IsMember({"timed", "mpc"}))
        ->delimiter(',');
    run->add_option("--control-horizon", run_args.control_horizons, "Control horizon C (list)")
        ->check(CLI::PositiveNumber)
        ->delimiter(',');
    run->add_option("--out-csv", run_args.out_csv, "CSV metrics, one row per run");
    run->add_option("--out-json", run_args.out_json, "JSON report with per-signal breakdowns");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Per-solve wall time of the MPC loop for each control horizon");
    add_common(*bench, bench_args.common);
    bench->add_option("--control-horizon", bench_args.control_horizons, "Control horizons C (list)")
        ->check(CLI::PositiveNumber)
        ->delimiter(',');
    bench->add_option("--out-csv", bench_args.out_csv, "CSV output (default stdout)");
    bench->add_flag("--paired", bench_args.paired,
                    "Time cold solves of the same logged problems at every C instead of separate closed loops");
    bench->add_option("--snapshot-every", bench_args.snapshot_every, "Seconds between logged problems (--paired)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--repeat", bench_args.repeat, "Attempts per problem, fastest kept (--paired)")
        ->check(CLI::PositiveNumber);

    ExportArgs export_args;
    auto* exp = app.add_subcommand("export-milp", "Write the horizon problem at a given second as an LP file");
    add_common(*exp, export_args.common);
    exp->add_option("--control-horizon", export_args.control_horizon, "Control horizon C");
    exp->add_option("--controller", export_args.controller, "Controller driving the run up to --at-second")
        ->check(CLI::IsMember({"timed", "mpc"}));
    exp->add_option("--at-second", export_args.at_second, "Simulated second of the snapshot")
        ->check(CLI::NonNegativeNumber);
    exp->add_option("--out", export_args.out_path, "LP file")->required();

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "Check a schedule file against the traffic law");
    verify->add_option("schedule", verify_args.schedule, "Schedule file, one line per second")->required();
    verify->add_option("--scenario", verify_args.scenario, "Scenario JSON file (default: built-in 4-way)");

    ProgramArgs program_args;
    auto* program = app.add_subcommand("program", "Render the time program as a schedule file");
    program->add_option("--scenario", program_args.scenario, "Scenario JSON file (default: built-in 4-way)");
    program->add_option("--cycles", program_args.cycles, "Cycles to render")->check(CLI::PositiveNumber);
    program->add_option("--out", program_args.out_path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_args, out);
        if (*bench) return cmd_bench(bench_args, out);
        if (*exp) return cmd_export(export_args, out);
        if (*verify) return cmd_verify(verify_args, out);
        if (*program) return cmd_program(program_args, out);
    } catch (const sim::LegalityAbort& e) {
        err << "error: " << e.what() << '\n';
        return kExitViolation;
    } catch (const io::ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitViolation;
    }
    return kExitUsage;
}

}  // namespace tsc::cli
