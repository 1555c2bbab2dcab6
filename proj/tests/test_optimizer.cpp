#include "doctest.h"

#include <random>

#include "support.hpp"
#include "tsc/legality.hpp"
#include "tsc/optimizer.hpp"

using namespace tsc;
using C = LightColor;

namespace {

IntersectionSpec one_signal(int yellow, int min_green) {
    IntersectionSpec s;
    s.n = 1;
    s.conflict = {{0}};
    s.green_interval = {{0}};
    s.yellow_period = {yellow};
    s.amber_period = {0};
    s.min_green = {min_green};
    s.max_flow = {1};
    s.labels = {"x"};
    return s;
}

IntersectionSpec crossing_pair() {
    IntersectionSpec s;
    s.n = 2;
    s.conflict = {{0, 1}, {1, 0}};
    s.green_interval = {{0, 2}, {2, 0}};
    s.yellow_period = {1, 1};
    s.amber_period = {0, 0};
    s.min_green = {1, 1};
    s.max_flow = {1, 1};
    s.labels = {"a", "b"};
    return s;
}

HorizonProblem make_problem(const IntersectionSpec& spec, int P, int C) {
    HorizonProblem p;
    p.spec = spec;
    p.initial = initial_state(spec);
    p.config.prediction_horizon = P;
    p.config.control_horizon = C;
    p.arrivals.assign(static_cast<std::size_t>(P), ArrivalVector(static_cast<std::size_t>(spec.n), 0));
    return p;
}

std::string render(const std::vector<ControlAction>& actions) {
    std::string out;
    for (const auto& a : actions) out += to_string(a) + " ";
    return out;
}

}  // namespace

TEST_CASE("stage cost") {
    ObjectiveWeights ones{1, 1, 1, 1, 1};
    auto s = initial_state(crossing_pair());
    s.action = parse_action("GG");
    s.t_ng = {0, 0};
    CHECK(stage_cost(s, {0, 0}, ObjectiveWeights{}) == 0.0);

    s.action = parse_action("RG");
    s.q = {2, 0};
    s.t_w = {3, 0};
    s.s = {1, 0};
    s.f = {0, 1};
    CHECK(stage_cost(s, {1, 1}, ones) == 6.0);
    CHECK(stage_cost(s, {1, 1}, ObjectiveWeights{2, 2, 2, 2, 2}) == 12.0);
}

TEST_CASE("weights and config validation") {
    CHECK_THROWS_AS(validate(ObjectiveWeights{-1, 0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ObjectiveWeights{1, 0, 0, 0, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
    MpcConfig m;
    m.prediction_horizon = 5;
    m.control_horizon = 6;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
    m.control_horizon = 0;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
    auto p = make_problem(crossing_pair(), 3, 3);
    p.arrivals.pop_back();
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("continuation") {
    SUBCASE("C = P is the identity") {
        auto p = make_problem(crossing_pair(), 2, 2);
        const std::vector<ControlAction> prefix = {parse_action("GR"), parse_action("GR")};
        CHECK(continuation(prefix, p) == prefix);
    }
    SUBCASE("yellow runs out its period then turns red") {
        auto spec = one_signal(4, 0);
        auto p = make_problem(spec, 5, 2);
        p.initial.action = parse_action("G");
        p.initial.t_g = {5};
        p.initial.t_ng = {0};
        const std::vector<ControlAction> prefix = {parse_action("Y"), parse_action("Y")};
        CHECK(render(continuation(prefix, p)) == "Y Y Y Y R ");
    }
    SUBCASE("green holds") {
        auto p = make_problem(crossing_pair(), 4, 1);
        CHECK(render(continuation({parse_action("GR")}, p)) == "GR GR GR GR ");
    }
}

TEST_CASE("single signal staying green costs nothing") {
    auto p = make_problem(one_signal(1, 1), 5, 5);
    p.initial.action = parse_action("G");
    p.initial.t_g = {3};
    p.initial.t_ng = {0};
    const auto r = solve(p);
    CHECK(r.proven_optimal);
    CHECK(r.schedule.objective == 0.0);
    CHECK(render(r.schedule.actions) == "G G G G G ");
    CHECK(r.schedule.per_step_cost.size() == 5);
}

TEST_CASE("hand enumeration of one signal over two steps") {
    // From red: RR, RG, GG, GY.
    auto p = make_problem(one_signal(1, 1), 2, 2);
    const auto e = enumerate_legal(p);
    CHECK(e.legal_schedules == 4);
    CHECK(e.best_objective == 0.0);
    CHECK(render(e.best_actions) == "G G ");
    std::vector<std::string> seen;
    for_each_legal_schedule(p, [&](const std::vector<ControlAction>& a) { seen.push_back(render(a)); });
    CHECK(seen == std::vector<std::string>{"G G ", "G Y ", "R G ", "R R "});
}

TEST_CASE("enumeration cap") {
    auto p = make_problem(crossing_pair(), 6, 6);
    CHECK_THROWS_AS(enumerate_legal(p, 10), EnumerationCapExceeded);
}

TEST_CASE("two crossing signals match enumeration") {
    auto p = make_problem(crossing_pair(), 4, 4);
    for (auto& a : p.arrivals) a = {0, 1};
    const auto r = solve(p);
    const auto e = enumerate_legal(p);
    CHECK(r.proven_optimal);
    CHECK(r.schedule.objective == e.best_objective);
    CHECK(r.schedule.actions == e.best_actions);
    CHECK(r.schedule.actions.front()[1] == C::Green);
}

TEST_CASE("ties resolve to the lexicographically smallest schedule") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = testing::random_problem(rng, testing::uniform(rng, 1, 3), 4, 4);
        p.config.weights = {0, 0, 0, 0, 0};
        std::vector<ControlAction> first;
        for_each_legal_schedule(p, [&](const std::vector<ControlAction>& a) {
            if (first.empty()) first = a;
        });
        CHECK(solve(p).schedule.actions == first);
    }
}

TEST_CASE("solve equals exhaustive enumeration on random small instances") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = testing::uniform(rng, 1, 3);
        const int P = testing::uniform(rng, 1, 6);
        const int Ch = testing::uniform(rng, 1, P);
        const auto p = testing::random_problem(rng, n, P, Ch);
        const auto r = solve(p);
        const auto e = enumerate_legal(p);
        CAPTURE(trial);
        REQUIRE(r.proven_optimal);
        CHECK(testing::tenths_cost(p, r.schedule.actions) == testing::tenths_cost(p, e.best_actions));
        CHECK(r.schedule.actions == e.best_actions);
        CHECK(r.schedule.objective == e.best_objective);
        CHECK(check_schedule(p.initial, r.schedule.actions, p.arrivals, p.spec).empty());
    }
}

TEST_CASE("bounds never exceed the optimum") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 150; ++trial) {
        const int P = testing::uniform(rng, 1, 5);
        const auto p = testing::random_problem(rng, testing::uniform(rng, 1, 3), P, testing::uniform(rng, 1, P));
        const double best = enumerate_legal(p).best_objective;
        CHECK(lower_bound(p.initial, p.arrivals, p.config.weights, p.spec) <= best + 1e-9);
        CHECK(earliest_green_bound(p.initial, p.arrivals, p.config.control_horizon, p.config.weights, p.spec) <=
              best + 1e-9);
    }
}

TEST_CASE("baseline lower bound") {
    auto spec = one_signal(1, 0);
    spec.max_flow = {2};
    auto s = initial_state(spec);
    CHECK(lower_bound(s, {{0}, {0}}, ObjectiveWeights{}, spec) == 0.0);
    s.q = {5};
    CHECK(lower_bound(s, {{3}, {1}}, ObjectiveWeights{1, 1, 1, 0, 1}, spec) == 0.0);
    s.q = {3};
    CHECK(lower_bound(s, {{0}}, ObjectiveWeights{0, 0, 0, 1, 0}, spec) == -2.0);
}

TEST_CASE("optimal objective is non-increasing in the control horizon") {
    std::mt19937_64 rng(8);
    const auto spec = builtin_fourway();
    for (int trial = 0; trial < 3; ++trial) {
        auto p = make_problem(spec, 30, 15);
        p.initial = testing::random_reachable_state(rng, spec, testing::uniform(rng, 5, 40));
        for (auto& a : p.arrivals) {
            for (int i = 0; i < 4; ++i) a[i] = testing::uniform(rng, 0, 5) == 0 ? 1 : 0;
        }
        double last = std::numeric_limits<double>::infinity();
        for (int c : {15, 20, 25, 30}) {
            p.config.control_horizon = c;
            const auto r = solve(p);
            REQUIRE(r.proven_optimal);
            CHECK(r.schedule.objective <= last);
            last = r.schedule.objective;
        }
    }
}

TEST_CASE("limits return a legal incumbent") {
    std::mt19937_64 rng(4);
    const auto spec = builtin_fourway();
    auto p = make_problem(spec, 30, 20);
    p.initial = testing::random_reachable_state(rng, spec, 30);
    for (auto& a : p.arrivals) a = testing::random_arrivals(rng, 4, 1);
    p.config.node_limit = 5;
    const auto r = solve(p);
    CHECK_FALSE(r.proven_optimal);
    CHECK(r.schedule.actions.size() == 30);
    CHECK(check_schedule(p.initial, r.schedule.actions, p.arrivals, spec).empty());
    CHECK_FALSE(r.incumbent_history.empty());

    p.config.node_limit.reset();
    p.config.time_limit = std::chrono::duration<double>(0.0);
    const auto t = solve(p);
    CHECK(check_schedule(p.initial, t.schedule.actions, p.arrivals, spec).empty());
}

TEST_CASE("mpc_step") {
    const auto spec = builtin_fourway();
    MpcConfig config;
    config.prediction_horizon = 10;
    config.control_horizon = 6;

    SUBCASE("settled green is a fixed point") {
        auto s = initial_state(spec);
        s.action = parse_action("GGRR");
        s.t_g = {20, 20, 0, 0};
        s.t_ng = {0, 0, 30, 30};
        const std::vector<ArrivalVector> none;
        const auto [a1, r1] = mpc_step(s, none, config, spec);
        const auto [a2, r2] = mpc_step(s, none, config, spec, &r1.schedule);
        CHECK(a1 == a2);
        CHECK(r1.schedule.objective == r2.schedule.objective);
    }

    SUBCASE("warm start changes nothing but effort") {
        std::mt19937_64 rng(12);
        auto s = initial_state(spec);
        Schedule previous;
        for (int t = 0; t < 60; ++t) {
            std::vector<ArrivalVector> forecast;
            for (int k = 0; k < 14; ++k) forecast.push_back(testing::random_arrivals(rng, 4, 1));
            const auto [cold_a, cold] = mpc_step(s, forecast, config, spec);
            const auto [warm_a, warm] = mpc_step(s, forecast, config, spec, t ? &previous : nullptr);
            CHECK(cold_a == warm_a);
            CHECK(cold.schedule.actions == warm.schedule.actions);
            CHECK(cold.schedule.objective == warm.schedule.objective);
            previous = warm.schedule;
            s = step(s, warm_a, forecast.front(), spec);
        }
    }
}

TEST_CASE("solve is deterministic") {
    std::mt19937_64 rng(21);
    const auto p = testing::random_problem(rng, 3, 6, 6);
    const auto a = solve(p);
    const auto b = solve(p);
    CHECK(a.schedule.actions == b.schedule.actions);
    CHECK(a.schedule.objective == b.schedule.objective);
    CHECK(a.nodes_explored == b.nodes_explored);
}

TEST_CASE("amber can lead into a dead end") {
    IntersectionSpec spec;
    spec.n = 2;
    spec.conflict = {{0, 1}, {1, 0}};
    spec.green_interval = {{0, 3}, {1, 0}};
    spec.yellow_period = {1, 1};
    spec.amber_period = {1, 1};
    spec.min_green = {0, 0};
    spec.max_flow = {1, 1};
    spec.labels = {"a", "b"};
    REQUIRE(validate_spec(spec).ok());
    const auto table = derive_transitions(spec);
    PlantState s = initial_state(spec);
    const ArrivalVector none{0, 0};
    for (const char* a : {"AR", "GR", "YR", "RA"}) {
        REQUIRE(check_step(s, parse_action(a), spec, table).empty());
        s = step(s, parse_action(a), none, spec);
    }
    // Signal 1 must leave amber for green, but signal 0 has been red for 1 s of the 3 required.
    CHECK(testing::legal_actions(s, spec, table).empty());
    CHECK_FALSE(testing::viable(s, spec, table));
    auto p = make_problem(spec, 3, 3);
    p.initial = s;
    CHECK_THROWS_AS(solve(p), InfeasibleError);
    CHECK_THROWS_AS(enumerate_legal(p), InfeasibleError);
}
