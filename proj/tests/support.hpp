#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "tsc/legality.hpp"
#include "tsc/optimizer.hpp"
#include "tsc/plant.hpp"
#include "tsc/topology.hpp"

namespace tsc::testing {

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Valid spec with random conflicts and small timing parameters.
inline IntersectionSpec random_spec(std::mt19937_64& rng, int n, int amber_max = 2) {
    IntersectionSpec s;
    s.n = n;
    s.conflict.assign(n, std::vector<int>(n, 0));
    s.green_interval.assign(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (uniform(rng, 0, 2) > 0) {
                s.conflict[i][j] = s.conflict[j][i] = 1;
                s.green_interval[i][j] = uniform(rng, 1, 3);
                s.green_interval[j][i] = uniform(rng, 1, 3);
            }
        }
        s.yellow_period.push_back(uniform(rng, 1, 2));
        s.amber_period.push_back(uniform(rng, 0, amber_max));
        s.min_green.push_back(uniform(rng, 0, 2));
        s.max_flow.push_back(uniform(rng, 1, 2));
        s.labels.push_back("s" + std::to_string(i));
    }
    return s;
}

/// Every legal action from `state`, in lexicographic color order.
inline std::vector<ControlAction> legal_actions(const PlantState& state, const IntersectionSpec& spec,
                                                const TransitionTable& table) {
    std::vector<ControlAction> out;
    int combos = 1;
    for (int i = 0; i < spec.n; ++i) combos *= 4;
    for (int code = 0; code < combos; ++code) {
        std::vector<LightColor> c(static_cast<std::size_t>(spec.n));
        int rest = code;
        for (int i = spec.n - 1; i >= 0; --i) {
            c[i] = kAllColors[rest % 4];
            rest /= 4;
        }
        ControlAction a(std::move(c));
        if (check_step(state, a, spec, table).empty()) out.push_back(std::move(a));
    }
    return out;
}

/// A state some legal schedule can leave. An amber signal must turn green
/// when its period ends, and a green interval can forbid that; holding
/// every color is the fastest way out, so rolling the continuation through
/// the longest amber decides it.
inline bool viable(PlantState state, const IntersectionSpec& spec, const TransitionTable& table) {
    int depth = 1;
    for (int a : spec.amber_period) depth = std::max(depth, a + 1);
    for (int k = 0; k < depth; ++k) {
        const auto next = continuation_action(state, spec);
        if (!check_step(state, next, spec, table).empty()) return false;
        state = step(state, next, ArrivalVector(static_cast<std::size_t>(spec.n), 0), spec);
    }
    return true;
}

/// Legal actions that do not lead into a dead end.
inline std::vector<ControlAction> viable_actions(const PlantState& state, const IntersectionSpec& spec,
                                                 const TransitionTable& table) {
    std::vector<ControlAction> out;
    const ArrivalVector none(static_cast<std::size_t>(spec.n), 0);
    for (auto& a : legal_actions(state, spec, table)) {
        if (viable(step(state, a, none, spec), spec, table)) out.push_back(std::move(a));
    }
    return out;
}

/// A random legal, viable action: a few uniform draws, then the
/// continuation action, which keeps a viable state viable.
inline ControlAction random_legal_action(std::mt19937_64& rng, const PlantState& state,
                                         const IntersectionSpec& spec, const TransitionTable& table) {
    const ArrivalVector none(static_cast<std::size_t>(spec.n), 0);
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<LightColor> c(static_cast<std::size_t>(spec.n));
        for (auto& x : c) x = kAllColors[static_cast<std::size_t>(uniform(rng, 0, 3))];
        ControlAction a(std::move(c));
        if (check_step(state, a, spec, table).empty() && viable(step(state, a, none, spec), spec, table)) return a;
    }
    return continuation_action(state, spec);
}

inline const ControlAction& pick(std::mt19937_64& rng, const std::vector<ControlAction>& options) {
    return options[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(options.size()) - 1))];
}

inline ArrivalVector random_arrivals(std::mt19937_64& rng, int n, int max_per_step) {
    ArrivalVector a(static_cast<std::size_t>(n));
    for (auto& v : a) v = uniform(rng, 0, max_per_step);
    return a;
}

/// State reached by a random legal walk from the canonical initial state.
inline PlantState random_reachable_state(std::mt19937_64& rng, const IntersectionSpec& spec, int steps) {
    const auto table = derive_transitions(spec);
    PlantState s = initial_state(spec);
    for (int k = 0; k < steps; ++k) {
        s = step(s, pick(rng, viable_actions(s, spec, table)), random_arrivals(rng, spec.n, 1), spec);
    }
    return s;
}

/// Weights that are multiples of 1/10 so costs scale to integers.
inline ObjectiveWeights random_weights(std::mt19937_64& rng) {
    auto w = [&] { return uniform(rng, 0, 30) / 10.0; };
    return {w(), w(), w(), w(), w()};
}

inline HorizonProblem random_problem(std::mt19937_64& rng, int n, int P, int C) {
    HorizonProblem p;
    p.spec = random_spec(rng, n);
    p.initial = random_reachable_state(rng, p.spec, uniform(rng, 0, 6));
    p.config.prediction_horizon = P;
    p.config.control_horizon = C;
    p.config.weights = random_weights(rng);
    for (int k = 0; k < P; ++k) p.arrivals.push_back(random_arrivals(rng, n, 2));
    return p;
}

/// Cost of a schedule in tenths, straight from the per-step state; weights
/// must be multiples of 1/10.
inline std::int64_t tenths_cost(const HorizonProblem& p, const std::vector<ControlAction>& actions) {
    auto scaled = [](double w) { return static_cast<std::int64_t>(w * 10.0 + 0.5); };
    const auto& w = p.config.weights;
    std::int64_t total = 0;
    PlantState s = p.initial;
    for (std::size_t k = 0; k < actions.size(); ++k) {
        s = step(s, actions[k], p.arrivals[k], p.spec);
        for (int i = 0; i < p.spec.n; ++i) {
            total += scaled(w.queue) * s.q[i] + scaled(w.wait) * s.t_w[i] + scaled(w.stops) * s.s[i] -
                     scaled(w.flow) * s.f[i] + (s.action.green(i) ? 0 : scaled(w.not_green));
        }
    }
    return total;
}

}  // namespace tsc::testing
