#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tsc/legality.hpp"
#include "tsc/optimizer.hpp"
#include "tsc/plant.hpp"
#include "tsc/topology.hpp"

namespace tsc::sim {

enum class VehicleState { Approaching, Queued, Departed };

struct Vehicle {
    std::int64_t id = 0;
    int signal = 0;
    int spawn_time = 0;
    double distance_remaining = 0.0;
    double speed = 0.0;
    /// Whole seconds until the vehicle reaches the stop line.
    int steps_to_stop_line = 0;
    VehicleState state = VehicleState::Approaching;
    /// Unset for vehicles that cross on green without stopping.
    std::optional<int> queue_join_time;
    std::optional<int> depart_time;
};

struct ScenarioConfig {
    std::string name = "scenario";
    IntersectionSpec spec;
    /// Per-signal probability of one arrival in each second.
    std::vector<double> arrival_probability;
    double approach_length_m = 500.0;
    double approach_speed_mps = 13.89;
    int duration_s = 3600;
    std::uint64_t seed = 1;
};

/// Throws std::invalid_argument on any out-of-range field.
void validate(const ScenarioConfig& config);

/// Seconds from spawn to the stop line at constant speed.
int travel_steps(const ScenarioConfig& config);

struct Phase {
    int duration_s = 0;
    ControlAction colors;
};

struct TimeProgram {
    std::vector<Phase> phases;
    int cycle_length() const;
};

/// Baseline plan of the 4-way intersection (N, S, E, W).
TimeProgram fourway_time_program();

/// Violations of two full cycles of the program run from the all-red
/// initial state. Throws std::invalid_argument on an empty program,
/// non-positive durations or a width mismatch.
std::vector<Violation> check_time_program(const TimeProgram& program, const IntersectionSpec& spec);

ControlAction time_program_action(const TimeProgram& program, int t);

/// Expands `seconds` steps of the cycled program.
std::vector<ControlAction> expand(const TimeProgram& program, int seconds);

using Controller = std::variant<TimeProgram, MpcConfig>;

std::string controller_name(const Controller& controller);

/// Independent generator per signal, so arrivals do not depend on the
/// controller and paired comparisons share demand.
std::vector<std::mt19937_64> make_streams(std::uint64_t seed, int n);

/// One Bernoulli draw per signal. Spawned vehicles are returned with id 0;
/// the caller numbers them.
std::vector<Vehicle> spawn_arrivals(const ScenarioConfig& config, int t, std::vector<std::mt19937_64>& streams);

struct World {
    ScenarioConfig config;
    int t = 0;
    std::vector<Vehicle> vehicles;
    /// Per signal: indices into `vehicles`, in arrival order.
    std::vector<std::deque<std::size_t>> approaching;
    std::vector<std::deque<std::size_t>> queued;
    PlantState plant;
};

World make_world(const ScenarioConfig& config);

struct AdvanceOutcome {
    /// Vehicles that reached the stop line this second.
    ArrivalVector arrivals;
    std::vector<int> departures;
};

/// Moves every approaching vehicle one second, then discharges queued
/// vehicles first and new arrivals second, up to max_flow per signal while
/// green. Does not touch world.plant.
AdvanceOutcome advance(World& world, const ControlAction& action, const IntersectionSpec& spec, int t);

/// Arrivals expected at each of the next P steps from the positions of
/// approaching vehicles. Queued vehicles are not included.
std::vector<ArrivalVector> forecast_arrivals(const World& world, const IntersectionSpec& spec, int P);

/// Nearest-rank 95th percentile. Throws std::invalid_argument when empty.
double percentile_95(std::vector<double> values);

struct SignalMetrics {
    std::string label;
    std::int64_t vehicles = 0;
    double avg_time_loss_s = 0.0;
    double p95_time_loss_s = 0.0;
    std::int64_t stops = 0;
    std::int64_t throughput = 0;
};

struct SolveStats {
    std::int64_t solves = 0;
    double mean_ms = 0.0;
    double sd_ms = 0.0;
    double max_ms = 0.0;
    std::int64_t not_proven = 0;
};

struct MetricsReport {
    std::int64_t vehicles = 0;
    double avg_time_loss_s = 0.0;
    double p95_time_loss_s = 0.0;
    std::int64_t stops = 0;
    std::int64_t throughput = 0;
    std::vector<SignalMetrics> per_signal;
    std::optional<SolveStats> solve;
};

class LegalityAbort : public std::runtime_error {
public:
    LegalityAbort(int t, std::vector<Violation> violations);
    int time() const { return t_; }
    const std::vector<Violation>& violations() const { return violations_; }

private:
    int t_;
    std::vector<Violation> violations_;
};

struct RunOptions {
    /// Record the horizon problem the controller faced every this many
    /// seconds (0 disables). MPC runs only.
    int snapshot_every = 0;
};

struct RunResult {
    MetricsReport metrics;
    std::vector<ControlAction> actions;
    std::vector<ArrivalVector> arrivals;
    std::vector<HorizonProblem> snapshots;
    std::vector<double> solve_ms;
};

/// Closed loop, one second at a time: spawn, decide, check legality,
/// advance the vehicles, step the plant.
class Simulation {
public:
    Simulation(ScenarioConfig scenario, Controller controller, RunOptions options = {});

    void step();
    int time() const { return world_.t; }
    const World& world() const { return world_; }

    /// Horizon problem built from the current world: plant state plus the
    /// forecast of vehicles already on the approaches.
    HorizonProblem horizon_problem(const MpcConfig& config) const;

    /// Final legality audit of everything actuated and the metrics.
    RunResult finish();

private:
    ControlAction decide();

    World world_;
    Controller controller_;
    RunOptions options_;
    TransitionTable table_;
    std::vector<std::mt19937_64> streams_;
    std::optional<Schedule> previous_;
    RunResult result_;
    std::int64_t not_proven_ = 0;
};

RunResult run(const ScenarioConfig& scenario, const Controller& controller, const RunOptions& options = {});

/// Metrics of a world at the end of its run.
MetricsReport summarize(const World& world);

/// Mean, sample deviation and maximum of per-solve times.
SolveStats solve_stats(const std::vector<double>& ms);

struct ColdTiming {
    SolveStats stats;
    double mean_nodes = 0.0;
};

/// Solves each problem at `control_horizon` without a warm start and keeps
/// the fastest of `repeats` attempts, so different horizons are timed on
/// identical problems.
ColdTiming time_cold_solves(const std::vector<HorizonProblem>& problems, int control_horizon, int repeats);

}  // namespace tsc::sim
