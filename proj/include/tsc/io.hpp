#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsc/optimizer.hpp"
#include "tsc/sim.hpp"
#include "tsc/topology.hpp"

namespace tsc::io {

/// Malformed or inconsistent input document.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

IntersectionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const IntersectionSpec& spec);
IntersectionSpec load_spec(const std::filesystem::path& path);

/// Everything a scenario file declares.
struct ScenarioFile {
    sim::ScenarioConfig scenario;
    std::string controller = "timed";
    sim::TimeProgram time_program;
    MpcConfig mpc;
};

/// `intersection` may be "builtin:fourway", an inline spec object or a
/// path relative to `base_dir`. Probabilities accept numbers or "a/b".
ScenarioFile scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& path);

/// The built-in 4-way scenario with the baseline program and MPC P=30, C=20.
ScenarioFile builtin_scenario();

/// One action per non-blank line, color codes separated by whitespace.
/// Lines starting with '#' are skipped. Throws ConfigError with the line
/// number on a bad code or a width other than `n`.
std::vector<ControlAction> read_schedule(std::istream& in, int n);
void write_schedule(std::ostream& out, const std::vector<ControlAction>& schedule);

/// Parses "w_q,w_tw,w_s,w_f,w_ng".
ObjectiveWeights parse_weights(const std::string& text);

struct RunRecord {
    std::string scenario;
    std::string controller;
    std::uint64_t seed = 0;
    int P = 0;
    int C = 0;
    sim::MetricsReport metrics;
};

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const RunRecord& record);
nlohmann::json to_json(const sim::MetricsReport& metrics);
nlohmann::json to_json(const RunRecord& record);

/// Fixed-precision decimal used by every text output.
std::string fixed(double value, int digits = 3);

}  // namespace tsc::io
