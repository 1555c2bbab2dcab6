#include "tsc/topology.hpp"

#include <sstream>
#include <stdexcept>

namespace tsc {

char color_code(LightColor c) {
    switch (c) {
        case LightColor::Green: return 'G';
        case LightColor::Yellow: return 'Y';
        case LightColor::Amber: return 'A';
        case LightColor::Red: return 'R';
    }
    return '?';
}

LightColor parse_color_code(char code) {
    switch (code) {
        case 'G': return LightColor::Green;
        case 'Y': return LightColor::Yellow;
        case 'A': return LightColor::Amber;
        case 'R': return LightColor::Red;
        default: break;
    }
    throw std::invalid_argument(std::string("unknown color code '") + code + "'");
}

std::string_view color_name(LightColor c) {
    switch (c) {
        case LightColor::Green: return "green";
        case LightColor::Yellow: return "yellow";
        case LightColor::Amber: return "amber";
        case LightColor::Red: return "red";
    }
    return "?";
}

std::string ValidationResult::describe() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << v.field;
        if (!v.indices.empty()) {
            out << '[';
            for (std::size_t k = 0; k < v.indices.size(); ++k) {
                out << (k ? "," : "") << v.indices[k];
            }
            out << ']';
        }
        out << ": " << v.rule << '\n';
    }
    return out.str();
}

namespace {

void check_vector(ValidationResult& result, const std::string& field, const std::vector<int>& values,
                  int n, int min_value) {
    if (static_cast<int>(values.size()) != n) {
        result.violations.push_back({field, {}, "length must equal n"});
        return;
    }
    for (int i = 0; i < n; ++i) {
        if (values[static_cast<std::size_t>(i)] < min_value) {
            result.violations.push_back(
                {field, {i}, min_value == 0 ? "must be non-negative" : "must be positive"});
        }
    }
}

bool square(const IntMatrix& m, int n) {
    if (static_cast<int>(m.size()) != n) return false;
    for (const auto& row : m) {
        if (static_cast<int>(row.size()) != n) return false;
    }
    return true;
}

}  // namespace

ValidationResult validate_spec(const IntersectionSpec& spec) {
    ValidationResult result;
    const int n = spec.n;
    if (n < 1) {
        result.violations.push_back({"n", {}, "must be at least 1"});
        return result;
    }

    const bool conflict_ok = square(spec.conflict, n);
    const bool interval_ok = square(spec.green_interval, n);
    if (!conflict_ok) result.violations.push_back({"conflict", {}, "must be an n x n matrix"});
    if (!interval_ok) result.violations.push_back({"green_interval", {}, "must be an n x n matrix"});

    if (conflict_ok) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const int c = spec.conflict[i][j];
                if (c != 0 && c != 1) {
                    result.violations.push_back({"conflict", {i, j}, "entries must be 0 or 1"});
                } else if (i == j && c != 0) {
                    result.violations.push_back({"conflict", {i, j}, "diagonal must be zero"});
                } else if (j > i && c != spec.conflict[j][i]) {
                    result.violations.push_back({"conflict", {i, j}, "matrix must be symmetric"});
                }
            }
        }
    }
    if (interval_ok) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const int g = spec.green_interval[i][j];
                if (g < 0) {
                    result.violations.push_back({"green_interval", {i, j}, "must be non-negative"});
                    continue;
                }
                if (i == j) {
                    if (g != 0) result.violations.push_back({"green_interval", {i, j}, "diagonal must be zero"});
                    continue;
                }
                if (!conflict_ok) continue;
                if (spec.conflict[i][j] == 1 && g <= 0) {
                    result.violations.push_back(
                        {"green_interval", {i, j}, "conflicting pair needs positive interval"});
                } else if (spec.conflict[i][j] == 0 && g != 0) {
                    result.violations.push_back(
                        {"green_interval", {i, j}, "non-conflicting pair must have zero interval"});
                }
            }
        }
    }

    check_vector(result, "yellow_period", spec.yellow_period, n, 1);
    check_vector(result, "amber_period", spec.amber_period, n, 0);
    check_vector(result, "min_green", spec.min_green, n, 0);
    check_vector(result, "max_flow", spec.max_flow, n, 1);
    if (static_cast<int>(spec.labels.size()) != n) {
        result.violations.push_back({"labels", {}, "length must equal n"});
    }
    return result;
}

void require_valid(const IntersectionSpec& spec) {
    const auto result = validate_spec(spec);
    if (!result.ok()) {
        throw std::invalid_argument("invalid intersection spec:\n" + result.describe());
    }
}

TransitionTable::TransitionTable(const std::vector<int>& amber_period) {
    allowed_.resize(amber_period.size());
    for (std::size_t i = 0; i < amber_period.size(); ++i) {
        auto& t = allowed_[i];
        for (auto& row : t) row.fill(false);
        for (auto c : kAllColors) t[color_index(c)][color_index(c)] = true;

        auto allow = [&t](LightColor a, LightColor b) { t[color_index(a)][color_index(b)] = true; };
        allow(LightColor::Green, LightColor::Yellow);
        allow(LightColor::Yellow, LightColor::Red);
        if (amber_period[i] > 0) {
            allow(LightColor::Red, LightColor::Amber);
            allow(LightColor::Amber, LightColor::Green);
        } else {
            allow(LightColor::Red, LightColor::Green);
        }
    }
}

int TransitionTable::blocked_count(int signal) const {
    int blocked = 0;
    for (const auto& row : allowed_[static_cast<std::size_t>(signal)]) {
        for (bool ok : row) blocked += ok ? 0 : 1;
    }
    return blocked;
}

TransitionTable derive_transitions(const IntersectionSpec& spec) {
    return TransitionTable(spec.amber_period);
}

IntersectionSpec builtin_fourway() {
    using namespace fourway;
    IntersectionSpec spec;
    spec.n = 4;
    spec.labels = {"N", "S", "E", "W"};
    spec.conflict.assign(4, std::vector<int>(4, 0));
    spec.green_interval.assign(4, std::vector<int>(4, 0));
    for (int ns : {kNorth, kSouth}) {
        for (int ew : {kEast, kWest}) {
            spec.conflict[ns][ew] = spec.conflict[ew][ns] = 1;
            spec.green_interval[ns][ew] = spec.green_interval[ew][ns] = 6;
        }
    }
    spec.yellow_period.assign(4, 4);
    spec.amber_period.assign(4, 0);
    spec.min_green.assign(4, 6);
    spec.max_flow.assign(4, 1);
    return spec;
}

}  // namespace tsc
