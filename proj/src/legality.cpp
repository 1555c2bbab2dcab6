#include "tsc/legality.hpp"

#include <sstream>
#include <stdexcept>

namespace tsc {

std::string_view violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::SingleLight: return "SingleLight";
        case ViolationKind::Conflict: return "Conflict";
        case ViolationKind::Transition: return "Transition";
        case ViolationKind::YellowTiming: return "YellowTiming";
        case ViolationKind::AmberTiming: return "AmberTiming";
        case ViolationKind::GreenInterval: return "GreenInterval";
        case ViolationKind::MinGreen: return "MinGreen";
    }
    return "?";
}

std::string describe(const Violation& v) {
    std::ostringstream out;
    out << "step " << v.step << ' ' << violation_kind_name(v.kind) << " (";
    for (std::size_t k = 0; k < v.signals.size(); ++k) out << (k ? "," : "") << v.signals[k];
    out << "): " << v.message;
    return out.str();
}

LightIndicators indicators_of(const ControlAction& action) {
    LightIndicators d;
    for (auto c : action.colors) {
        d.green.push_back(c == LightColor::Green);
        d.yellow.push_back(c == LightColor::Yellow);
        d.amber.push_back(c == LightColor::Amber);
        d.red.push_back(c == LightColor::Red);
    }
    return d;
}

std::vector<Violation> check_single_light(const LightIndicators& d) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < d.green.size(); ++i) {
        const int sum = d.green[i] + d.yellow[i] + d.amber[i] + d.red[i];
        if (sum != 1) {
            out.push_back({0, ViolationKind::SingleLight, {static_cast<int>(i)},
                           std::to_string(sum) + " lights active"});
        }
    }
    return out;
}

std::vector<Violation> check_single_light(const ControlAction& action) {
    return check_single_light(indicators_of(action));
}

namespace {

bool blocking(LightColor c) { return c != LightColor::Red; }

}  // namespace

std::vector<Violation> check_conflict(const ControlAction& action, const IntersectionSpec& spec) {
    std::vector<Violation> out;
    for (int i = 0; i < spec.n; ++i) {
        if (!blocking(action[i])) continue;
        for (int j = i + 1; j < spec.n; ++j) {
            if (spec.conflict[i][j] == 1 && blocking(action[j])) {
                out.push_back({0, ViolationKind::Conflict, {i, j},
                               std::string(color_name(action[i])) + " and " +
                                   std::string(color_name(action[j])) + " on conflicting signals"});
            }
        }
    }
    return out;
}

std::vector<Violation> check_transition(const ControlAction& prev, const ControlAction& next,
                                        const TransitionTable& table) {
    std::vector<Violation> out;
    for (int i = 0; i < next.size(); ++i) {
        if (!table.allowed(i, prev[i], next[i])) {
            out.push_back({0, ViolationKind::Transition, {i},
                           std::string(color_name(prev[i])) + " to " +
                               std::string(color_name(next[i])) + " is not permitted"});
        }
    }
    return out;
}

std::vector<Violation> check_timed_color(const PlantState& prev, const ControlAction& next,
                                         const IntersectionSpec& spec, LightColor color) {
    if (color != LightColor::Yellow && color != LightColor::Amber) {
        throw std::invalid_argument("timed color must be yellow or amber");
    }
    const bool yellow = color == LightColor::Yellow;
    const auto kind = yellow ? ViolationKind::YellowTiming : ViolationKind::AmberTiming;
    const auto& period = yellow ? spec.yellow_period : spec.amber_period;
    const auto& timer = yellow ? prev.t_y : prev.t_a;

    std::vector<Violation> out;
    for (int i = 0; i < spec.n; ++i) {
        const bool was = prev.action[i] == color;
        const bool is = next[i] == color;
        const int elapsed = was ? timer[i] : 0;
        if (was && !is && elapsed < period[i]) {
            out.push_back({0, kind, {i},
                           "left after " + std::to_string(elapsed) + " s of " +
                               std::to_string(period[i]) + " s"});
        }
        if (is && elapsed + 1 > period[i]) {
            out.push_back({0, kind, {i},
                           "held beyond " + std::to_string(period[i]) + " s period"});
        }
    }
    return out;
}

std::vector<Violation> check_green_interval(const PlantState& prev, const ControlAction& next,
                                            const IntersectionSpec& spec) {
    std::vector<Violation> out;
    for (int j = 0; j < spec.n; ++j) {
        if (!next.green(j)) continue;
        for (int i = 0; i < spec.n; ++i) {
            const int gap = spec.green_interval[i][j] - prev.t_ng[i];
            if (i != j && gap > 0) {
                out.push_back({0, ViolationKind::GreenInterval, {i, j},
                               "signal " + std::to_string(i) + " not-green for " +
                                   std::to_string(prev.t_ng[i]) + " s, needs " +
                                   std::to_string(spec.green_interval[i][j]) + " s"});
            }
        }
    }
    return out;
}

std::vector<Violation> check_min_green(const PlantState& prev, const ControlAction& next,
                                       const IntersectionSpec& spec) {
    std::vector<Violation> out;
    for (int i = 0; i < spec.n; ++i) {
        if (prev.action.green(i) && !next.green(i) && prev.t_g[i] < spec.min_green[i]) {
            out.push_back({0, ViolationKind::MinGreen, {i},
                           "green ended after " + std::to_string(prev.t_g[i]) + " s, minimum " +
                               std::to_string(spec.min_green[i]) + " s"});
        }
    }
    return out;
}

std::vector<Violation> check_step(const PlantState& prev, const ControlAction& next,
                                  const IntersectionSpec& spec, const TransitionTable& table) {
    if (next.size() != spec.n) {
        throw std::invalid_argument("action has " + std::to_string(next.size()) + " signals, expected " +
                                    std::to_string(spec.n));
    }
    std::vector<Violation> out;
    auto append = [&out](std::vector<Violation>&& more) {
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    };
    append(check_single_light(next));
    append(check_conflict(next, spec));
    append(check_transition(prev.action, next, table));
    append(check_timed_color(prev, next, spec, LightColor::Yellow));
    append(check_timed_color(prev, next, spec, LightColor::Amber));
    append(check_green_interval(prev, next, spec));
    append(check_min_green(prev, next, spec));
    return out;
}

std::vector<Violation> check_schedule(const PlantState& initial,
                                      const std::vector<ControlAction>& schedule,
                                      const std::vector<ArrivalVector>& arrivals,
                                      const IntersectionSpec& spec) {
    if (schedule.size() != arrivals.size()) {
        throw std::invalid_argument("schedule has " + std::to_string(schedule.size()) + " steps but " +
                                    std::to_string(arrivals.size()) + " arrival vectors");
    }
    const auto table = derive_transitions(spec);
    std::vector<Violation> out;
    PlantState state = initial;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        auto found = check_step(state, schedule[k], spec, table);
        for (auto& v : found) {
            v.step = static_cast<int>(k);
            out.push_back(std::move(v));
        }
        state = step(state, schedule[k], arrivals[k], spec);
    }
    return out;
}

std::vector<Violation> check_schedule(const PlantState& initial,
                                      const std::vector<ControlAction>& schedule,
                                      const IntersectionSpec& spec) {
    const std::vector<ArrivalVector> zeros(schedule.size(),
                                           ArrivalVector(static_cast<std::size_t>(spec.n), 0));
    return check_schedule(initial, schedule, zeros, spec);
}

}  // namespace tsc
