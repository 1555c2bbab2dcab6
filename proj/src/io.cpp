#include "tsc/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tsc::io {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

double probability(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto text = v.get<std::string>();
        const auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return std::stod(text);
            const double den = std::stod(text.substr(slash + 1));
            if (den == 0.0) throw ConfigError("zero denominator in probability '" + text + "'");
            return std::stod(text.substr(0, slash)) / den;
        } catch (const std::logic_error&) {
            throw ConfigError("bad probability '" + text + "'");
        }
    }
    throw ConfigError("probability must be a number or an \"a/b\" string");
}

}  // namespace

IntersectionSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("intersection spec must be an object");
    IntersectionSpec s;
    s.n = field<int>(j, "n");
    s.conflict = field<IntMatrix>(j, "conflict");
    s.green_interval = field<IntMatrix>(j, "green_interval");
    s.yellow_period = field<std::vector<int>>(j, "yellow_period");
    s.amber_period = field<std::vector<int>>(j, "amber_period");
    s.min_green = field<std::vector<int>>(j, "min_green");
    s.max_flow = field<std::vector<int>>(j, "max_flow");
    s.labels = field_or<std::vector<std::string>>(j, "labels", {});
    const auto check = validate_spec(s);
    if (!check.ok()) throw ConfigError(check.describe());
    return s;
}

json spec_to_json(const IntersectionSpec& s) {
    return json{{"n", s.n},
                {"conflict", s.conflict},
                {"green_interval", s.green_interval},
                {"yellow_period", s.yellow_period},
                {"amber_period", s.amber_period},
                {"min_green", s.min_green},
                {"max_flow", s.max_flow},
                {"labels", s.labels}};
}

IntersectionSpec load_spec(const std::filesystem::path& path) { return spec_from_json(read_json(path)); }

namespace {

IntersectionSpec resolve_intersection(const json& v, const std::filesystem::path& base_dir) {
    if (v.is_object()) return spec_from_json(v);
    if (!v.is_string()) throw ConfigError("intersection must be a string or an object");
    const auto ref = v.get<std::string>();
    if (ref == "builtin:fourway") return builtin_fourway();
    const std::filesystem::path p = base_dir.empty() ? std::filesystem::path(ref) : base_dir / ref;
    return load_spec(p);
}

sim::TimeProgram program_from_json(const json& j, int n) {
    if (!j.is_array() || j.empty()) throw ConfigError("time_program must be a non-empty array");
    sim::TimeProgram program;
    for (const auto& p : j) {
        sim::Phase phase;
        phase.duration_s = field<int>(p, "duration_s");
        try {
            phase.colors = parse_action(field<std::string>(p, "colors"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("time_program: ") + e.what());
        }
        if (phase.duration_s < 1) throw ConfigError("time_program durations must be at least 1 s");
        if (phase.colors.size() != n) throw ConfigError("time_program colors must name every signal");
        program.phases.push_back(std::move(phase));
    }
    return program;
}

ObjectiveWeights weights_from_json(const json& j) {
    ObjectiveWeights w;
    w.queue = field_or(j, "queue", w.queue);
    w.wait = field_or(j, "wait", w.wait);
    w.stops = field_or(j, "stops", w.stops);
    w.flow = field_or(j, "flow", w.flow);
    w.not_green = field_or(j, "not_green", w.not_green);
    return w;
}

}  // namespace

ScenarioFile builtin_scenario() {
    ScenarioFile f;
    f.scenario.name = "fourway";
    f.scenario.spec = builtin_fourway();
    f.scenario.arrival_probability = {1.0 / 12, 1.0 / 12, 1.0 / 6, 1.0 / 6};
    f.time_program = sim::fourway_time_program();
    return f;
}

ScenarioFile scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("scenario must be an object");
    ScenarioFile f;
    auto& s = f.scenario;
    s.name = field_or<std::string>(j, "name", "scenario");
    s.spec = resolve_intersection(j.contains("intersection") ? j.at("intersection") : json("builtin:fourway"),
                                  base_dir);
    const auto& probs = j.contains("arrival_probability") ? j.at("arrival_probability") : json();
    if (!probs.is_array()) throw ConfigError("arrival_probability must be an array");
    for (const auto& p : probs) s.arrival_probability.push_back(probability(p));
    s.approach_length_m = field_or(j, "approach_length_m", s.approach_length_m);
    s.approach_speed_mps = field_or(j, "approach_speed_mps", s.approach_speed_mps);
    s.duration_s = field_or(j, "duration_s", s.duration_s);
    s.seed = field_or<std::uint64_t>(j, "seed", s.seed);

    f.controller = field_or<std::string>(j, "controller", "timed");
    if (f.controller != "timed" && f.controller != "mpc") {
        throw ConfigError("controller must be \"timed\" or \"mpc\", got \"" + f.controller + "\"");
    }
    if (j.contains("time_program")) {
        f.time_program = program_from_json(j.at("time_program"), s.spec.n);
    } else if (s.spec.n == 4) {
        f.time_program = sim::fourway_time_program();
    }
    if (j.contains("mpc")) {
        const auto& m = j.at("mpc");
        f.mpc.prediction_horizon = field_or(m, "prediction_horizon", f.mpc.prediction_horizon);
        f.mpc.control_horizon = field_or(m, "control_horizon", f.mpc.control_horizon);
        if (m.contains("weights")) f.mpc.weights = weights_from_json(m.at("weights"));
        if (m.contains("time_limit_s")) {
            f.mpc.time_limit = std::chrono::duration<double>(field<double>(m, "time_limit_s"));
        }
    }
    try {
        sim::validate(s);
        validate(f.mpc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json(path), path.parent_path());
}

std::vector<ControlAction> read_schedule(std::istream& in, int n) {
    std::vector<ControlAction> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream tokens(line);
        std::vector<LightColor> colors;
        std::string tok;
        while (tokens >> tok) {
            for (char c : tok) {
                try {
                    colors.push_back(parse_color_code(c));
                } catch (const std::invalid_argument&) {
                    throw ConfigError("line " + std::to_string(line_no) + ": bad color code '" +
                                      std::string(1, c) + "'");
                }
            }
        }
        if (static_cast<int>(colors.size()) != n) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(n) +
                              " colors, found " + std::to_string(colors.size()));
        }
        out.emplace_back(std::move(colors));
    }
    return out;
}

void write_schedule(std::ostream& out, const std::vector<ControlAction>& schedule) {
    for (const auto& a : schedule) {
        for (int i = 0; i < a.size(); ++i) out << (i ? " " : "") << color_code(a[i]);
        out << '\n';
    }
}

ObjectiveWeights parse_weights(const std::string& text) {
    std::vector<double> v;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError("bad weight '" + item + "'");
        }
    }
    if (v.size() != 5) throw ConfigError("weights need five values w_q,w_tw,w_s,w_f,w_ng");
    ObjectiveWeights w{v[0], v[1], v[2], v[3], v[4]};
    try {
        validate(w);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return w;
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

void write_csv_header(std::ostream& out) {
    out << "scenario,controller,seed,P,C,vehicles,avg_tl_s,p95_tl_s,stops,throughput,mean_solve_ms,sd_solve_ms\n";
}

void write_csv_row(std::ostream& out, const RunRecord& r) {
    const auto& m = r.metrics;
    out << r.scenario << ',' << r.controller << ',' << r.seed << ',';
    if (m.solve) {
        out << r.P << ',' << r.C << ',';
    } else {
        out << ",,";
    }
    out << m.vehicles << ',' << fixed(m.avg_time_loss_s) << ',' << fixed(m.p95_time_loss_s) << ',' << m.stops << ','
        << m.throughput << ',';
    if (m.solve) {
        out << fixed(m.solve->mean_ms, 4) << ',' << fixed(m.solve->sd_ms, 4);
    } else {
        out << ',';
    }
    out << '\n';
}

json to_json(const sim::MetricsReport& m) {
    json signals = json::array();
    for (const auto& s : m.per_signal) {
        signals.push_back({{"label", s.label},
                           {"vehicles", s.vehicles},
                           {"avg_tl_s", s.avg_time_loss_s},
                           {"p95_tl_s", s.p95_time_loss_s},
                           {"stops", s.stops},
                           {"throughput", s.throughput}});
    }
    json j{{"vehicles", m.vehicles},
           {"avg_tl_s", m.avg_time_loss_s},
           {"p95_tl_s", m.p95_time_loss_s},
           {"stops", m.stops},
           {"throughput", m.throughput},
           {"per_signal", signals}};
    if (m.solve) {
        j["solve"] = {{"solves", m.solve->solves},
                      {"mean_ms", m.solve->mean_ms},
                      {"sd_ms", m.solve->sd_ms},
                      {"max_ms", m.solve->max_ms},
                      {"not_proven_optimal", m.solve->not_proven}};
    }
    return j;
}

json to_json(const RunRecord& r) {
    json j{{"scenario", r.scenario}, {"controller", r.controller}, {"seed", r.seed}, {"metrics", to_json(r.metrics)}};
    if (r.metrics.solve) {
        j["P"] = r.P;
        j["C"] = r.C;
    }
    return j;
}

}  // namespace tsc::io
