#include "doctest.h"

#include <sstream>

#include "tsc/io.hpp"

using namespace tsc;
using nlohmann::json;

namespace {
const std::filesystem::path kScenarios = std::filesystem::path(TSC_SOURCE_DIR) / "scenarios";
}

TEST_CASE("spec json round trip") {
    const auto spec = builtin_fourway();
    const auto back = io::spec_from_json(io::spec_to_json(spec));
    CHECK(back.conflict == spec.conflict);
    CHECK(back.green_interval == spec.green_interval);
    CHECK(back.yellow_period == spec.yellow_period);
    CHECK(back.amber_period == spec.amber_period);
    CHECK(back.min_green == spec.min_green);
    CHECK(back.max_flow == spec.max_flow);
    CHECK(back.labels == spec.labels);
}

TEST_CASE("spec json errors") {
    auto j = io::spec_to_json(builtin_fourway());
    j.erase("max_flow");
    CHECK_THROWS_WITH_AS(io::spec_from_json(j), "missing field 'max_flow'", io::ConfigError);
    j = io::spec_to_json(builtin_fourway());
    j["conflict"][0][2] = 0;
    CHECK_THROWS_AS(io::spec_from_json(j), io::ConfigError);
    j = io::spec_to_json(builtin_fourway());
    j["n"] = "four";
    CHECK_THROWS_AS(io::spec_from_json(j), io::ConfigError);
    CHECK_THROWS_AS(io::load_spec(kScenarios / "missing.json"), io::ConfigError);
}

TEST_CASE("shipped scenario files") {
    const auto f = io::load_scenario(kScenarios / "fourway.json");
    CHECK(f.scenario.spec.n == 4);
    CHECK(f.scenario.arrival_probability[0] == doctest::Approx(1.0 / 12));
    CHECK(f.scenario.arrival_probability[2] == doctest::Approx(1.0 / 6));
    CHECK(f.mpc.prediction_horizon == 30);
    CHECK(f.mpc.control_horizon == 20);
    CHECK(f.time_program.cycle_length() == 72);
    CHECK(sim::check_time_program(f.time_program, f.scenario.spec).empty());
    const auto spec = io::load_spec(kScenarios / "fourway_intersection.json");
    CHECK(spec.conflict == builtin_fourway().conflict);
}

TEST_CASE("scenario parsing") {
    json j{{"intersection", "builtin:fourway"}, {"arrival_probability", {"1/12", 0.25, "1/6", "0.5"}}};
    auto f = io::scenario_from_json(j);
    CHECK(f.scenario.arrival_probability[0] == doctest::Approx(1.0 / 12));
    CHECK(f.scenario.arrival_probability[1] == 0.25);
    CHECK(f.scenario.arrival_probability[3] == 0.5);
    CHECK(f.controller == "timed");
    CHECK(f.time_program.cycle_length() == 72);

    j["controller"] = "fuzzy";
    CHECK_THROWS_AS(io::scenario_from_json(j), io::ConfigError);
    j["controller"] = "mpc";
    j["arrival_probability"] = {"1/0", 0, 0, 0};
    CHECK_THROWS_AS(io::scenario_from_json(j), io::ConfigError);
    j["arrival_probability"] = {0.1, 0.1, 0.1};
    CHECK_THROWS_AS(io::scenario_from_json(j), io::ConfigError);
    j["arrival_probability"] = {0.1, 0.1, 0.1, 0.1};
    j["mpc"] = {{"prediction_horizon", 10}, {"control_horizon", 12}};
    CHECK_THROWS_AS(io::scenario_from_json(j), io::ConfigError);
    j["mpc"] = {{"prediction_horizon", 12}, {"control_horizon", 6}, {"weights", {{"flow", 3.0}}}};
    f = io::scenario_from_json(j);
    CHECK(f.mpc.weights.flow == 3.0);
    CHECK(f.mpc.weights.queue == 1.0);
    j["time_program"] = json::array({{{"duration_s", 10}, {"colors", "GGR"}}});
    CHECK_THROWS_AS(io::scenario_from_json(j), io::ConfigError);
}

TEST_CASE("schedule files") {
    std::istringstream ok("# header\nG G R R\n\nYYRR\n");
    const auto s = io::read_schedule(ok, 4);
    REQUIRE(s.size() == 2);
    CHECK(to_string(s[1]) == "YYRR");

    std::istringstream bad_code("G G R R\nG Q R R\n");
    CHECK_THROWS_WITH_AS(io::read_schedule(bad_code, 4), "line 2: bad color code 'Q'", io::ConfigError);
    std::istringstream short_line("G G R\n");
    CHECK_THROWS_WITH_AS(io::read_schedule(short_line, 4), "line 1: expected 4 colors, found 3", io::ConfigError);

    const auto program = sim::expand(sim::fourway_time_program(), 144);
    std::stringstream round;
    io::write_schedule(round, program);
    CHECK(io::read_schedule(round, 4) == program);
}

TEST_CASE("weights") {
    const auto w = io::parse_weights("1,0.5,1,2,0.1");
    CHECK(w.queue == 1.0);
    CHECK(w.wait == 0.5);
    CHECK(w.flow == 2.0);
    CHECK(w.not_green == 0.1);
    CHECK_THROWS_AS(io::parse_weights("1,2,3"), io::ConfigError);
    CHECK_THROWS_AS(io::parse_weights("1,2,3,4,x"), io::ConfigError);
    CHECK_THROWS_AS(io::parse_weights("1,2,3,4,-1"), io::ConfigError);
}

TEST_CASE("csv rows") {
    std::ostringstream out;
    io::write_csv_header(out);
    io::RunRecord timed{"fourway", "timed", 3, 0, 0, {}};
    timed.metrics.vehicles = 10;
    timed.metrics.avg_time_loss_s = 1.23456;
    timed.metrics.p95_time_loss_s = 4;
    timed.metrics.stops = 2;
    timed.metrics.throughput = 9;
    io::write_csv_row(out, timed);
    io::RunRecord mpc = timed;
    mpc.controller = "mpc";
    mpc.P = 30;
    mpc.C = 20;
    mpc.metrics.solve = sim::SolveStats{100, 0.5, 0.25, 3, 0};
    io::write_csv_row(out, mpc);
    CHECK(out.str() ==
          "scenario,controller,seed,P,C,vehicles,avg_tl_s,p95_tl_s,stops,throughput,mean_solve_ms,sd_solve_ms\n"
          "fourway,timed,3,,,10,1.235,4.000,2,9,,\n"
          "fourway,mpc,3,30,20,10,1.235,4.000,2,9,0.5000,0.2500\n");
    const auto j = io::to_json(mpc);
    CHECK(j["P"] == 30);
    CHECK(j["metrics"]["solve"]["solves"] == 100);
    CHECK_FALSE(io::to_json(timed).contains("P"));
}
