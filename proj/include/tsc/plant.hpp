#pragma once

#include <stdexcept>
#include <vector>

#include "tsc/topology.hpp"

namespace tsc {

/// One color per signal for one 1 s step.
struct ControlAction {
    std::vector<LightColor> colors;

    ControlAction() = default;
    explicit ControlAction(std::vector<LightColor> c) : colors(std::move(c)) {}
    ControlAction(int n, LightColor c) : colors(static_cast<std::size_t>(n), c) {}

    int size() const { return static_cast<int>(colors.size()); }
    LightColor operator[](int i) const { return colors[static_cast<std::size_t>(i)]; }
    bool green(int i) const { return (*this)[i] == LightColor::Green; }
    bool operator==(const ControlAction&) const = default;
};

/// Renders as color codes, e.g. "GGRR".
std::string to_string(const ControlAction& action);
/// Parses "GGRR" or "G G R R".
ControlAction parse_action(std::string_view text);

/// Vehicles arriving at each signal's stop line during one second.
using ArrivalVector = std::vector<int>;

/// Dynamic per-signal state after a step: colors, queues and timers in
/// whole vehicles and whole seconds.
struct PlantState {
    ControlAction action;
    std::vector<int> q;
    std::vector<int> t_g, t_y, t_a, t_ng;
    std::vector<int> t_w;
    std::vector<int> f;
    std::vector<int> s;

    int size() const { return action.size(); }
    bool operator==(const PlantState&) const = default;
};

/// Raised when an update would break an invariant of the plant (negative
/// queue, mismatched dimensions).
class PlantError : public std::logic_error {
    using std::logic_error::logic_error;
};

/// All red, empty queues; t_ng starts at the largest green interval so the
/// first green request is not blocked by history.
PlantState initial_state(const IntersectionSpec& spec);

std::vector<int> flow(const ControlAction& action, const std::vector<int>& q_prev,
                      const ArrivalVector& arrivals, const IntersectionSpec& spec);

std::vector<int> queue_update(const std::vector<int>& q_prev, const ArrivalVector& arrivals,
                              const std::vector<int>& f);

struct ColorTimers {
    std::vector<int> t_g, t_y, t_a, t_ng;
};

ColorTimers timer_update(const PlantState& prev, const ControlAction& action);

std::vector<int> wait_update(const std::vector<int>& t_w_prev, const ControlAction& action,
                             const std::vector<int>& q);

std::vector<int> stops(const ControlAction& action, const ArrivalVector& arrivals);

/// One 1 s tick of the plant. Legality of `action` is not checked here.
PlantState step(const PlantState& prev, const ControlAction& action, const ArrivalVector& arrivals,
                const IntersectionSpec& spec);

}  // namespace tsc
