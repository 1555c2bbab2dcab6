#include "tsc/plant.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace tsc {

std::string to_string(const ControlAction& action) {
    std::string out;
    out.reserve(action.colors.size());
    for (auto c : action.colors) out.push_back(color_code(c));
    return out;
}

ControlAction parse_action(std::string_view text) {
    ControlAction action;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        action.colors.push_back(parse_color_code(ch));
    }
    return action;
}

namespace {

void require_size(std::size_t got, int n, const char* what) {
    if (static_cast<int>(got) != n) {
        throw PlantError(std::string("dimension mismatch: ") + what + " has " + std::to_string(got) +
                         " entries, expected " + std::to_string(n));
    }
}

}  // namespace

PlantState initial_state(const IntersectionSpec& spec) {
    const auto n = static_cast<std::size_t>(spec.n);
    int widest = 0;
    for (const auto& row : spec.green_interval) {
        for (int v : row) widest = std::max(widest, v);
    }
    PlantState s;
    s.action = ControlAction(spec.n, LightColor::Red);
    s.q.assign(n, 0);
    s.t_g.assign(n, 0);
    s.t_y.assign(n, 0);
    s.t_a.assign(n, 0);
    s.t_ng.assign(n, widest);
    s.t_w.assign(n, 0);
    s.f.assign(n, 0);
    s.s.assign(n, 0);
    return s;
}

std::vector<int> flow(const ControlAction& action, const std::vector<int>& q_prev,
                      const ArrivalVector& arrivals, const IntersectionSpec& spec) {
    const int n = spec.n;
    require_size(action.colors.size(), n, "action");
    require_size(q_prev.size(), n, "queue");
    require_size(arrivals.size(), n, "arrivals");
    std::vector<int> f(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (action.green(i)) {
            f[i] = std::min(spec.max_flow[i], arrivals[i] + q_prev[i]);
        }
    }
    return f;
}

std::vector<int> queue_update(const std::vector<int>& q_prev, const ArrivalVector& arrivals,
                              const std::vector<int>& f) {
    const int n = static_cast<int>(q_prev.size());
    require_size(arrivals.size(), n, "arrivals");
    require_size(f.size(), n, "flow");
    std::vector<int> q(q_prev.size());
    for (int i = 0; i < n; ++i) {
        q[i] = q_prev[i] + arrivals[i] - f[i];
        if (q[i] < 0) {
            throw PlantError("queue of signal " + std::to_string(i) + " would become negative");
        }
    }
    return q;
}

ColorTimers timer_update(const PlantState& prev, const ControlAction& action) {
    const auto n = action.colors.size();
    ColorTimers t;
    t.t_g.assign(n, 0);
    t.t_y.assign(n, 0);
    t.t_a.assign(n, 0);
    t.t_ng.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        switch (action.colors[i]) {
            case LightColor::Green: t.t_g[i] = prev.t_g[i] + 1; break;
            case LightColor::Yellow: t.t_y[i] = prev.t_y[i] + 1; break;
            case LightColor::Amber: t.t_a[i] = prev.t_a[i] + 1; break;
            case LightColor::Red: break;
        }
        if (action.colors[i] != LightColor::Green) t.t_ng[i] = prev.t_ng[i] + 1;
    }
    return t;
}

std::vector<int> wait_update(const std::vector<int>& t_w_prev, const ControlAction& action,
                             const std::vector<int>& q) {
    std::vector<int> t_w(t_w_prev.size(), 0);
    for (std::size_t i = 0; i < t_w.size(); ++i) {
        if (action.colors[i] != LightColor::Green && q[i] >= 1) t_w[i] = t_w_prev[i] + 1;
    }
    return t_w;
}

std::vector<int> stops(const ControlAction& action, const ArrivalVector& arrivals) {
    std::vector<int> s(arrivals.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (action.colors[i] != LightColor::Green) s[i] = arrivals[i];
    }
    return s;
}

PlantState step(const PlantState& prev, const ControlAction& action, const ArrivalVector& arrivals,
                const IntersectionSpec& spec) {
    require_size(prev.q.size(), spec.n, "state");
    PlantState next;
    next.action = action;
    next.f = flow(action, prev.q, arrivals, spec);
    next.q = queue_update(prev.q, arrivals, next.f);
    auto timers = timer_update(prev, action);
    next.t_g = std::move(timers.t_g);
    next.t_y = std::move(timers.t_y);
    next.t_a = std::move(timers.t_a);
    next.t_ng = std::move(timers.t_ng);
    next.t_w = wait_update(prev.t_w, action, next.q);
    next.s = stops(action, arrivals);
    return next;
}

}  // namespace tsc
