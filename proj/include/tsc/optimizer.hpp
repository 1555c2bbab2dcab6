#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tsc/plant.hpp"
#include "tsc/topology.hpp"

namespace tsc {

/// Per-unit costs of the stage objective. The flow weight enters with a
/// negative sign since discharge is rewarded.
struct ObjectiveWeights {
    double queue = 1.0;
    double wait = 0.5;
    double stops = 1.0;
    double flow = 2.0;
    double not_green = 0.1;

    bool operator==(const ObjectiveWeights&) const = default;
};

void validate(const ObjectiveWeights& weights);

struct MpcConfig {
    int prediction_horizon = 30;
    int control_horizon = 20;
    ObjectiveWeights weights;
    std::optional<std::chrono::duration<double>> time_limit;
    std::optional<std::int64_t> node_limit;
};

/// Throws std::invalid_argument unless 1 <= control_horizon <= prediction_horizon
/// and the weights are finite and non-negative.
void validate(const MpcConfig& config);

struct HorizonProblem {
    IntersectionSpec spec;
    PlantState initial;
    /// One arrival vector per prediction step.
    std::vector<ArrivalVector> arrivals;
    MpcConfig config;
};

void validate(const HorizonProblem& problem);

struct Schedule {
    std::vector<ControlAction> actions;
    double objective = 0.0;
    std::vector<double> per_step_cost;
};

struct IncumbentRecord {
    double seconds = 0.0;
    double objective = 0.0;
};

struct SolveReport {
    Schedule schedule;
    std::int64_t nodes_explored = 0;
    std::chrono::duration<double> wall_time{0.0};
    bool proven_optimal = false;
    std::vector<IncumbentRecord> incumbent_history;
};

class InfeasibleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Stage objective of a post-step state.
double stage_cost(const PlantState& state, const ArrivalVector& arrivals, const ObjectiveWeights& weights);

/// Extends a legal C-step prefix to the full prediction horizon: yellow and
/// amber run out their period and take their forced successor, every other
/// signal holds its color. Throws std::logic_error if that is illegal.
std::vector<ControlAction> continuation(const std::vector<ControlAction>& prefix,
                                        const HorizonProblem& problem);

/// The action the continuation policy takes from `state`.
ControlAction continuation_action(const PlantState& state, const IntersectionSpec& spec);

/// Legality-free relaxation: every signal green on every remaining step,
/// only the flow reward counted. Never exceeds the true cost-to-go.
double lower_bound(const PlantState& state, const std::vector<ArrivalVector>& remaining,
                   const ObjectiveWeights& weights, const IntersectionSpec& spec);

/// Tighter bound used by the search: each signal stays not-green until the
/// earliest step its own timers and its conflicting signals' timers allow,
/// then is green for the rest of the horizon. `free_steps` is how many of
/// the remaining steps are still decision steps.
double earliest_green_bound(const PlantState& state, const std::vector<ArrivalVector>& remaining,
                            int free_steps, const ObjectiveWeights& weights,
                            const IntersectionSpec& spec);

/// Exact minimum over all legal schedules whose first C actions are free
/// and whose remainder follows the continuation policy. Ties resolve to the
/// schedule that is lexicographically smallest step by step, signals in
/// index order within a step, colors ordered green < yellow < amber < red.
/// `warm` (optional) seeds the incumbent; it never changes the answer of a
/// search that completes.
SolveReport solve(const HorizonProblem& problem, const std::vector<ControlAction>* warm = nullptr);

struct EnumerationResult {
    double best_objective = 0.0;
    std::int64_t legal_schedules = 0;
    std::vector<ControlAction> best_actions;
};

class EnumerationCapExceeded : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Brute force over every color combination at every free step, built only
/// on the legality checker and the plant. Test oracle for `solve`.
EnumerationResult enumerate_legal(const HorizonProblem& problem, std::int64_t node_cap = 5'000'000);

/// Visits every legal schedule of the problem (same space as enumerate_legal).
void for_each_legal_schedule(const HorizonProblem& problem,
                             const std::function<void(const std::vector<ControlAction>&)>& visit,
                             std::int64_t node_cap = 5'000'000);

/// Total objective of a full P-step schedule, rolled through the plant.
double evaluate_schedule(const HorizonProblem& problem, const std::vector<ControlAction>& actions,
                         std::vector<double>* per_step = nullptr);

/// Receding-horizon step: solves over `forecast` (zero-padded or truncated
/// to P) and returns the first action with the full report. When `previous`
/// is given it is shifted by one step and offered as a warm start.
std::pair<ControlAction, SolveReport> mpc_step(const PlantState& current,
                                               const std::vector<ArrivalVector>& forecast,
                                               const MpcConfig& config, const IntersectionSpec& spec,
                                               const Schedule* previous = nullptr);

}  // namespace tsc
