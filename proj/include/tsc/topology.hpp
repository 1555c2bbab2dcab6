#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tsc {

enum class LightColor : std::uint8_t { Green = 0, Yellow = 1, Amber = 2, Red = 3 };

inline constexpr std::array<LightColor, 4> kAllColors = {LightColor::Green, LightColor::Yellow,
                                                         LightColor::Amber, LightColor::Red};

constexpr int color_index(LightColor c) { return static_cast<int>(c); }

/// Single-letter code used by schedule files: G, Y, A, R.
char color_code(LightColor c);
/// Inverse of color_code; throws std::invalid_argument on anything else.
LightColor parse_color_code(char code);
std::string_view color_name(LightColor c);

using IntMatrix = std::vector<std::vector<int>>;

/// Static topology and law parameters of one intersection. Signal indices
/// are 0-based and stable; all durations are whole seconds.
struct IntersectionSpec {
    int n = 0;
    /// conflict[i][j] == 1 iff movements i and j cross and must never be
    /// blocking (green, yellow or amber) at the same time.
    IntMatrix conflict;
    /// green_interval[i][j]: seconds i must have been not-green before j
    /// may be green. May be asymmetric.
    IntMatrix green_interval;
    std::vector<int> yellow_period;
    std::vector<int> amber_period;
    std::vector<int> min_green;
    /// Vehicles per second that can discharge while green.
    std::vector<int> max_flow;
    std::vector<std::string> labels;
};

struct SpecViolation {
    std::string field;
    std::vector<int> indices;
    std::string rule;
};

struct ValidationResult {
    std::vector<SpecViolation> violations;

    bool ok() const { return violations.empty(); }
    std::string describe() const;
};

ValidationResult validate_spec(const IntersectionSpec& spec);

/// Throws std::invalid_argument carrying every violation when the spec is
/// not valid.
void require_valid(const IntersectionSpec& spec);

/// Allowed (prev -> next) color pairs per signal, self-loops included.
class TransitionTable {
public:
    TransitionTable() = default;
    explicit TransitionTable(const std::vector<int>& amber_period);

    bool allowed(int signal, LightColor from, LightColor to) const {
        return allowed_[static_cast<std::size_t>(signal)][color_index(from)][color_index(to)];
    }
    int signal_count() const { return static_cast<int>(allowed_.size()); }
    /// Number of (prev, next) pairs the table forbids for the signal.
    int blocked_count(int signal) const;

private:
    std::vector<std::array<std::array<bool, 4>, 4>> allowed_;
};

TransitionTable derive_transitions(const IntersectionSpec& spec);

namespace fourway {
inline constexpr int kNorth = 0;
inline constexpr int kSouth = 1;
inline constexpr int kEast = 2;
inline constexpr int kWest = 3;
}  // namespace fourway

/// Symmetric 4-way intersection: N/S through movements conflict with E/W;
/// amber 0 s, yellow 4 s, minimum green 6 s, green interval 6 s, one
/// vehicle per second discharge.
IntersectionSpec builtin_fourway();

}  // namespace tsc
