#pragma once

#include <string>
#include <vector>

#include "tsc/plant.hpp"
#include "tsc/topology.hpp"

namespace tsc {

enum class ViolationKind {
    SingleLight,
    Conflict,
    Transition,
    YellowTiming,
    AmberTiming,
    GreenInterval,
    MinGreen,
};

std::string_view violation_kind_name(ViolationKind kind);

struct Violation {
    int step = 0;
    ViolationKind kind = ViolationKind::SingleLight;
    std::vector<int> signals;
    std::string message;
};

std::string describe(const Violation& v);

/// Raw one-hot indicator vectors for one step, as they come out of a MILP
/// solution: entry i of each vector is 0 or 1.
struct LightIndicators {
    std::vector<int> green, yellow, amber, red;
};

LightIndicators indicators_of(const ControlAction& action);

// Per-step checks. Each returns every violation found with step index 0;
// check_schedule rewrites the step index.

std::vector<Violation> check_single_light(const LightIndicators& indicators);
std::vector<Violation> check_single_light(const ControlAction& action);

std::vector<Violation> check_conflict(const ControlAction& action, const IntersectionSpec& spec);

std::vector<Violation> check_transition(const ControlAction& prev, const ControlAction& next,
                                        const TransitionTable& table);

/// Yellow or amber must be held for exactly its period: leaving early and
/// overstaying are both violations.
std::vector<Violation> check_timed_color(const PlantState& prev, const ControlAction& next,
                                         const IntersectionSpec& spec, LightColor color);

std::vector<Violation> check_green_interval(const PlantState& prev, const ControlAction& next,
                                            const IntersectionSpec& spec);

std::vector<Violation> check_min_green(const PlantState& prev, const ControlAction& next,
                                       const IntersectionSpec& spec);

/// Every per-step rule for a single transition prev -> next.
std::vector<Violation> check_step(const PlantState& prev, const ControlAction& next,
                                  const IntersectionSpec& spec, const TransitionTable& table);

/// Rolls the plant from `initial` and collects all violations of the whole
/// schedule. Timers are re-derived here, never taken from the caller.
std::vector<Violation> check_schedule(const PlantState& initial,
                                      const std::vector<ControlAction>& schedule,
                                      const std::vector<ArrivalVector>& arrivals,
                                      const IntersectionSpec& spec);

/// Same as above with zero arrivals; legality never depends on traffic.
std::vector<Violation> check_schedule(const PlantState& initial,
                                      const std::vector<ControlAction>& schedule,
                                      const IntersectionSpec& spec);

}  // namespace tsc
