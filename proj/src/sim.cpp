#include "tsc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsc::sim {

void validate(const ScenarioConfig& config) {
    require_valid(config.spec);
    if (static_cast<int>(config.arrival_probability.size()) != config.spec.n) {
        throw std::invalid_argument("arrival_probability needs one entry per signal");
    }
    for (double p : config.arrival_probability) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("arrival probabilities must lie in [0, 1]");
    }
    if (!(config.approach_length_m > 0.0) || !std::isfinite(config.approach_length_m)) {
        throw std::invalid_argument("approach length must be positive");
    }
    if (!(config.approach_speed_mps > 0.0) || !std::isfinite(config.approach_speed_mps)) {
        throw std::invalid_argument("approach speed must be positive");
    }
    if (config.duration_s < 1) throw std::invalid_argument("duration must be at least 1 s");
}

int travel_steps(const ScenarioConfig& config) {
    const double exact = config.approach_length_m / config.approach_speed_mps;
    return std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
}

int TimeProgram::cycle_length() const {
    int total = 0;
    for (const auto& p : phases) total += p.duration_s;
    return total;
}

TimeProgram fourway_time_program() {
    auto phase = [](int d, const char* colors) { return Phase{d, parse_action(colors)}; };
    return TimeProgram{{phase(20, "GGRR"), phase(4, "YYRR"), phase(2, "RRRR"), phase(40, "RRGG"),
                        phase(4, "RRYY"), phase(2, "RRRR")}};
}

std::vector<Violation> check_time_program(const TimeProgram& program, const IntersectionSpec& spec) {
    if (program.phases.empty()) throw std::invalid_argument("time program is empty");
    for (const auto& p : program.phases) {
        if (p.duration_s < 1) throw std::invalid_argument("time program phases must last at least 1 s");
        if (p.colors.size() != spec.n) throw std::invalid_argument("time program phase width != n");
    }
    return check_schedule(initial_state(spec), expand(program, 2 * program.cycle_length()), spec);
}

ControlAction time_program_action(const TimeProgram& program, int t) {
    if (program.phases.empty()) throw std::invalid_argument("time program is empty");
    const int cycle = program.cycle_length();
    int offset = ((t % cycle) + cycle) % cycle;
    for (const auto& p : program.phases) {
        if (offset < p.duration_s) return p.colors;
        offset -= p.duration_s;
    }
    return program.phases.back().colors;
}

std::vector<ControlAction> expand(const TimeProgram& program, int seconds) {
    std::vector<ControlAction> out;
    out.reserve(static_cast<std::size_t>(std::max(seconds, 0)));
    for (int t = 0; t < seconds; ++t) out.push_back(time_program_action(program, t));
    return out;
}

std::string controller_name(const Controller& controller) {
    return std::holds_alternative<TimeProgram>(controller) ? "timed" : "mpc";
}

std::vector<std::mt19937_64> make_streams(std::uint64_t seed, int n) {
    std::vector<std::mt19937_64> out;
    for (int i = 0; i < n; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        out.emplace_back(seq);
    }
    return out;
}

std::vector<Vehicle> spawn_arrivals(const ScenarioConfig& config, int t, std::vector<std::mt19937_64>& streams) {
    std::vector<Vehicle> out;
    const int steps = travel_steps(config);
    for (int i = 0; i < config.spec.n; ++i) {
        const double u = static_cast<double>(streams[i]() >> 11) * 0x1.0p-53;
        if (u < config.arrival_probability[i]) {
            Vehicle v;
            v.signal = i;
            v.spawn_time = t;
            v.distance_remaining = config.approach_length_m;
            v.speed = config.approach_speed_mps;
            v.steps_to_stop_line = steps;
            out.push_back(v);
        }
    }
    return out;
}

World make_world(const ScenarioConfig& config) {
    World w;
    w.config = config;
    const auto n = static_cast<std::size_t>(config.spec.n);
    w.approaching.resize(n);
    w.queued.resize(n);
    w.plant = initial_state(config.spec);
    return w;
}

AdvanceOutcome advance(World& world, const ControlAction& action, const IntersectionSpec& spec, int t) {
    const int n = spec.n;
    AdvanceOutcome out{ArrivalVector(static_cast<std::size_t>(n), 0), std::vector<int>(static_cast<std::size_t>(n), 0)};
    for (int i = 0; i < n; ++i) {
        std::vector<std::size_t> reached;
        for (std::size_t id : world.approaching[i]) {
            Vehicle& v = world.vehicles[id];
            v.distance_remaining = std::max(0.0, v.distance_remaining - v.speed);
            if (--v.steps_to_stop_line == 0) {
                v.distance_remaining = 0.0;
                reached.push_back(id);
            }
        }
        auto& lane = world.approaching[i];
        lane.erase(std::remove_if(lane.begin(), lane.end(),
                                  [&](std::size_t id) { return world.vehicles[id].steps_to_stop_line == 0; }),
                   lane.end());
        out.arrivals[i] = static_cast<int>(reached.size());

        int capacity = action.green(i) ? spec.max_flow[i] : 0;
        while (capacity > 0 && !world.queued[i].empty()) {
            Vehicle& v = world.vehicles[world.queued[i].front()];
            world.queued[i].pop_front();
            v.state = VehicleState::Departed;
            v.depart_time = t + 1;
            --capacity;
            ++out.departures[i];
        }
        for (std::size_t id : reached) {
            Vehicle& v = world.vehicles[id];
            if (capacity > 0) {
                v.state = VehicleState::Departed;
                v.depart_time = t + 1;
                --capacity;
                ++out.departures[i];
            } else {
                v.state = VehicleState::Queued;
                v.queue_join_time = t + 1;
                world.queued[i].push_back(id);
            }
        }
    }
    return out;
}

std::vector<ArrivalVector> forecast_arrivals(const World& world, const IntersectionSpec& spec, int P) {
    std::vector<ArrivalVector> out(static_cast<std::size_t>(std::max(P, 0)),
                                   ArrivalVector(static_cast<std::size_t>(spec.n), 0));
    for (int i = 0; i < spec.n; ++i) {
        for (std::size_t id : world.approaching[i]) {
            const int k = world.vehicles[id].steps_to_stop_line;
            if (k >= 1 && k <= P) ++out[k - 1][i];
        }
    }
    return out;
}

double percentile_95(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const std::size_t rank = (95 * n + 99) / 100;
    return values[rank - 1];
}

LegalityAbort::LegalityAbort(int t, std::vector<Violation> violations)
    : std::runtime_error([&] {
          std::string msg = "legality abort at t=" + std::to_string(t);
          for (const auto& v : violations) msg += "\n  " + describe(v);
          return msg;
      }()),
      t_(t),
      violations_(std::move(violations)) {}

MetricsReport summarize(const World& world) {
    const auto& cfg = world.config;
    const double free_flow = cfg.approach_length_m / cfg.approach_speed_mps;
    const int n = cfg.spec.n;
    std::vector<std::vector<double>> losses(static_cast<std::size_t>(n));
    MetricsReport m;
    m.per_signal.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        m.per_signal[i].label = i < static_cast<int>(cfg.spec.labels.size()) ? cfg.spec.labels[i] : std::to_string(i);
    }
    for (const auto& v : world.vehicles) {
        auto& sig = m.per_signal[v.signal];
        const double end = v.depart_time ? *v.depart_time : world.t;
        losses[v.signal].push_back(std::max(0.0, end - v.spawn_time - free_flow));
        ++sig.vehicles;
        if (v.queue_join_time) ++sig.stops;
        if (v.depart_time) ++sig.throughput;
    }
    std::vector<double> all;
    for (int i = 0; i < n; ++i) {
        auto& sig = m.per_signal[i];
        const auto& l = losses[i];
        if (!l.empty()) {
            sig.avg_time_loss_s = std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
            sig.p95_time_loss_s = percentile_95(l);
        }
        m.vehicles += sig.vehicles;
        m.stops += sig.stops;
        m.throughput += sig.throughput;
        all.insert(all.end(), l.begin(), l.end());
    }
    if (!all.empty()) {
        m.avg_time_loss_s = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
        m.p95_time_loss_s = percentile_95(all);
    }
    return m;
}

Simulation::Simulation(ScenarioConfig scenario, Controller controller, RunOptions options)
    : controller_(std::move(controller)), options_(options) {
    validate(scenario);
    if (const auto* program = std::get_if<TimeProgram>(&controller_)) {
        auto found = check_time_program(*program, scenario.spec);
        if (!found.empty()) throw LegalityAbort(0, std::move(found));
    } else {
        validate(std::get<MpcConfig>(controller_));
    }
    table_ = derive_transitions(scenario.spec);
    streams_ = make_streams(scenario.seed, scenario.spec.n);
    world_ = make_world(scenario);
}

HorizonProblem Simulation::horizon_problem(const MpcConfig& config) const {
    HorizonProblem p;
    p.spec = world_.config.spec;
    p.initial = world_.plant;
    p.config = config;
    p.arrivals = forecast_arrivals(world_, p.spec, config.prediction_horizon);
    return p;
}

ControlAction Simulation::decide() {
    if (const auto* program = std::get_if<TimeProgram>(&controller_)) {
        return time_program_action(*program, world_.t);
    }
    const auto& config = std::get<MpcConfig>(controller_);
    HorizonProblem problem = horizon_problem(config);
    if (options_.snapshot_every > 0 && world_.t % options_.snapshot_every == 0) {
        result_.snapshots.push_back(problem);
    }
    const auto start = std::chrono::steady_clock::now();
    auto [action, report] = mpc_step(problem.initial, problem.arrivals, config, problem.spec,
                                     previous_ ? &*previous_ : nullptr);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    result_.solve_ms.push_back(std::chrono::duration<double, std::milli>(elapsed).count());
    if (!report.proven_optimal) ++not_proven_;
    previous_ = std::move(report.schedule);
    return action;
}

void Simulation::step() {
    const int t = world_.t;
    const auto& spec = world_.config.spec;
    for (auto& v : spawn_arrivals(world_.config, t, streams_)) {
        v.id = static_cast<std::int64_t>(world_.vehicles.size());
        world_.approaching[v.signal].push_back(world_.vehicles.size());
        world_.vehicles.push_back(v);
    }

    const ControlAction action = decide();
    auto found = check_step(world_.plant, action, spec, table_);
    if (!found.empty()) {
        for (auto& v : found) v.step = t;
        throw LegalityAbort(t, std::move(found));
    }

    const AdvanceOutcome moved = advance(world_, action, spec, t);
    world_.plant = tsc::step(world_.plant, action, moved.arrivals, spec);
    for (int i = 0; i < spec.n; ++i) {
        if (world_.plant.f[i] != moved.departures[i] ||
            world_.plant.q[i] != static_cast<int>(world_.queued[i].size())) {
            throw std::logic_error("plant and vehicle model disagree at t=" + std::to_string(t));
        }
    }
    result_.actions.push_back(action);
    result_.arrivals.push_back(moved.arrivals);
    world_.t = t + 1;
}

SolveStats solve_stats(const std::vector<double>& ms) {
    SolveStats s;
    s.solves = static_cast<std::int64_t>(ms.size());
    if (ms.empty()) return s;
    s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    double ss = 0.0;
    for (double x : ms) ss += (x - s.mean_ms) * (x - s.mean_ms);
    s.sd_ms = ms.size() > 1 ? std::sqrt(ss / static_cast<double>(ms.size() - 1)) : 0.0;
    s.max_ms = *std::max_element(ms.begin(), ms.end());
    return s;
}

RunResult Simulation::finish() {
    auto found = check_schedule(initial_state(world_.config.spec), result_.actions, result_.arrivals,
                                world_.config.spec);
    if (!found.empty()) throw LegalityAbort(found.front().step, std::move(found));
    result_.metrics = summarize(world_);
    if (std::holds_alternative<MpcConfig>(controller_)) {
        SolveStats s = solve_stats(result_.solve_ms);
        s.not_proven = not_proven_;
        result_.metrics.solve = s;
    }
    return std::move(result_);
}

RunResult run(const ScenarioConfig& scenario, const Controller& controller, const RunOptions& options) {
    Simulation simulation(scenario, controller, options);
    while (simulation.time() < scenario.duration_s) simulation.step();
    return simulation.finish();
}

ColdTiming time_cold_solves(const std::vector<HorizonProblem>& problems, int control_horizon, int repeats) {
    if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    std::vector<double> best;
    std::int64_t nodes = 0, not_proven = 0;
    for (HorizonProblem p : problems) {
        p.config.control_horizon = control_horizon;
        validate(p.config);
        double fastest = std::numeric_limits<double>::infinity();
        for (int r = 0; r < repeats; ++r) {
            const auto start = std::chrono::steady_clock::now();
            const auto report = solve(p);
            const auto elapsed = std::chrono::steady_clock::now() - start;
            fastest = std::min(fastest, std::chrono::duration<double, std::milli>(elapsed).count());
            if (r == 0) {
                nodes += report.nodes_explored;
                not_proven += !report.proven_optimal;
            }
        }
        best.push_back(fastest);
    }
    ColdTiming t;
    t.stats = solve_stats(best);
    t.stats.not_proven = not_proven;
    t.mean_nodes = problems.empty() ? 0.0 : static_cast<double>(nodes) / static_cast<double>(problems.size());
    return t;
}

}  // namespace tsc::sim
