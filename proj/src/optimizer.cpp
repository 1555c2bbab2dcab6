#include "tsc/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "tsc/legality.hpp"

namespace tsc {

void validate(const ObjectiveWeights& w) {
    for (double v : {w.queue, w.wait, w.stops, w.flow, w.not_green}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("objective weights must be finite and non-negative");
        }
    }
}

void validate(const MpcConfig& config) {
    if (config.prediction_horizon < 1) throw std::invalid_argument("prediction horizon must be at least 1");
    if (config.control_horizon < 1 || config.control_horizon > config.prediction_horizon) {
        throw std::invalid_argument("control horizon must satisfy 1 <= C <= P (got C=" +
                                    std::to_string(config.control_horizon) +
                                    ", P=" + std::to_string(config.prediction_horizon) + ")");
    }
    validate(config.weights);
}

void validate(const HorizonProblem& problem) {
    require_valid(problem.spec);
    validate(problem.config);
    if (static_cast<int>(problem.arrivals.size()) != problem.config.prediction_horizon) {
        throw std::invalid_argument("arrival forecast must have exactly P entries");
    }
    for (const auto& a : problem.arrivals) {
        if (static_cast<int>(a.size()) != problem.spec.n) throw std::invalid_argument("arrival vector size != n");
        for (int v : a) {
            if (v < 0) throw std::invalid_argument("arrivals must be non-negative");
        }
    }
    const auto& s = problem.initial;
    const auto n = static_cast<std::size_t>(problem.spec.n);
    for (const auto* v : {&s.q, &s.t_g, &s.t_y, &s.t_a, &s.t_ng, &s.t_w}) {
        if (v->size() != n) throw std::invalid_argument("initial state vector size != n");
    }
    if (s.action.colors.size() != n) throw std::invalid_argument("initial colors size != n");
}

double stage_cost(const PlantState& state, const ArrivalVector& /*arrivals*/, const ObjectiveWeights& w) {
    double q = 0, tw = 0, s = 0, f = 0, ng = 0;
    for (int i = 0; i < state.size(); ++i) {
        q += state.q[i];
        tw += state.t_w[i];
        s += state.s[i];
        f += state.f[i];
        ng += state.action.green(i) ? 0 : 1;
    }
    return w.queue * q + w.wait * tw + w.stops * s - w.flow * f + w.not_green * ng;
}

ControlAction continuation_action(const PlantState& state, const IntersectionSpec& spec) {
    ControlAction next = state.action;
    for (int i = 0; i < spec.n; ++i) {
        switch (state.action[i]) {
            case LightColor::Yellow:
                if (state.t_y[i] >= spec.yellow_period[i]) next.colors[i] = LightColor::Red;
                break;
            case LightColor::Amber:
                if (state.t_a[i] >= spec.amber_period[i]) next.colors[i] = LightColor::Green;
                break;
            default: break;
        }
    }
    return next;
}

std::vector<ControlAction> continuation(const std::vector<ControlAction>& prefix,
                                        const HorizonProblem& problem) {
    const int P = problem.config.prediction_horizon;
    const int C = problem.config.control_horizon;
    if (static_cast<int>(prefix.size()) != C) {
        throw std::invalid_argument("continuation prefix must have exactly C actions");
    }
    const auto table = derive_transitions(problem.spec);
    std::vector<ControlAction> out = prefix;
    PlantState state = problem.initial;
    for (int k = 0; k < P; ++k) {
        if (k >= C) out.push_back(continuation_action(state, problem.spec));
        auto found = check_step(state, out[k], problem.spec, table);
        if (!found.empty()) {
            found.front().step = k;
            throw std::logic_error("illegal schedule at " + describe(found.front()));
        }
        state = step(state, out[k], problem.arrivals[k], problem.spec);
    }
    return out;
}

double lower_bound(const PlantState& state, const std::vector<ArrivalVector>& remaining,
                   const ObjectiveWeights& weights, const IntersectionSpec& spec) {
    double bound = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        int backlog = state.q[i];
        for (const auto& a : remaining) {
            const int f = std::min(spec.max_flow[i], backlog + a[i]);
            backlog += a[i] - f;
            bound -= weights.flow * f;
        }
    }
    return bound;
}

double evaluate_schedule(const HorizonProblem& problem, const std::vector<ControlAction>& actions,
                         std::vector<double>* per_step) {
    if (actions.size() != problem.arrivals.size()) {
        throw std::invalid_argument("schedule length must equal the prediction horizon");
    }
    double total = 0.0;
    if (per_step) per_step->clear();
    PlantState state = problem.initial;
    for (std::size_t k = 0; k < actions.size(); ++k) {
        state = step(state, actions[k], problem.arrivals[k], problem.spec);
        const double c = stage_cost(state, problem.arrivals[k], problem.config.weights);
        total += c;
        if (per_step) per_step->push_back(c);
    }
    return total;
}

namespace {

constexpr int kMaxSignals = 16;
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

using Clock = std::chrono::steady_clock;

struct ScaledWeights {
    std::int64_t queue = 0, wait = 0, stops = 0, flow = 0, not_green = 0;
    double scale = 1.0;
};

// Finds the smallest power of ten that makes every weight integral so the
// search compares costs exactly. Weights with more than six decimals are
// rounded at 1e-6.
ScaledWeights scale_weights(const ObjectiveWeights& w) {
    const std::array<double, 5> values = {w.queue, w.wait, w.stops, w.flow, w.not_green};
    double scale = 1.0;
    for (; scale < 1e6; scale *= 10.0) {
        bool integral = true;
        for (double v : values) {
            const double x = v * scale;
            if (std::abs(x - std::round(x)) > 1e-9 * std::max(1.0, std::abs(x))) integral = false;
        }
        if (integral) break;
    }
    auto to_int = [scale](double v) { return static_cast<std::int64_t>(std::llround(v * scale)); };
    return {to_int(w.queue), to_int(w.wait), to_int(w.stops), to_int(w.flow), to_int(w.not_green), scale};
}

using Colors = std::array<LightColor, kMaxSignals>;

struct Node {
    Colors color{};
    std::array<int, kMaxSignals> q{}, tg{}, ty{}, ta{}, tng{}, tw{};
};

struct DomEntry {
    std::int64_t g;
    std::array<int, 2 * kMaxSignals> v;
};

// Depth-first branch and bound over the free steps.
//
// Costs are tracked in a shifted form: the flow reward telescopes to
// wf * (q0 + total arrivals - final queue), so the objective equals
//   sum_k (wq q + wtw tw + ws s + wng ng) + wf * q_P - wf * (q0 + arrivals).
// Every remaining term is non-decreasing in (q, tw) for a fixed action
// sequence, which makes Pareto dominance between nodes of identical light
// signature exact.
class BranchAndBound {
public:
    explicit BranchAndBound(const HorizonProblem& problem)
        : p_(problem),
          spec_(problem.spec),
          n_(problem.spec.n),
          P_(problem.config.prediction_horizon),
          C_(problem.config.control_horizon),
          w_(scale_weights(problem.config.weights)) {
        if (n_ > kMaxSignals) {
            throw std::invalid_argument("solver supports at most " + std::to_string(kMaxSignals) + " signals");
        }
        cap_ng_.assign(n_, 0);
        conflict_mask_.assign(n_, 0);
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                cap_ng_[i] = std::max(cap_ng_[i], spec_.green_interval[i][j]);
                if (spec_.conflict[i][j]) conflict_mask_[i] |= 1u << j;
            }
        }
        arrivals_.resize(static_cast<std::size_t>(P_) * n_);
        for (int k = 0; k < P_; ++k) {
            for (int i = 0; i < n_; ++i) arrivals_[k * n_ + i] = problem.arrivals[k][i];
        }
        std::int64_t inflow = 0;
        for (int i = 0; i < n_; ++i) inflow += problem.initial.q[i];
        for (int v : arrivals_) inflow += v;
        offset_ = w_.flow * inflow;

        stack_.resize(P_ + 1);
        path_.resize(P_);
        best_path_.resize(P_);
        options_.resize(P_);
        dominance_.resize(C_ + 1);
        stack_[0] = from_plant(problem.initial);

        if (problem.config.time_limit) deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(*problem.config.time_limit);
        node_limit_ = problem.config.node_limit.value_or(std::numeric_limits<std::int64_t>::max());
    }

    // Seeds the incumbent with a full schedule that is not a search result;
    // such incumbents lose ties to any schedule the search finds.
    void offer(const std::vector<ControlAction>& actions) {
        if (static_cast<int>(actions.size()) != P_) return;
        if (!check_schedule(p_.initial, actions, p_.arrivals, spec_).empty()) return;
        Node state = stack_[0];
        std::int64_t cost = 0;
        std::vector<Colors> colors(P_);
        for (int k = 0; k < P_; ++k) {
            for (int i = 0; i < n_; ++i) colors[k][i] = actions[k][i];
            if (k >= C_ && !matches_continuation(state, colors[k])) return;
            Node next;
            cost += advance(state, colors[k], k, next);
            state = next;
        }
        cost += terminal(state);
        if (cost < best_) {
            best_ = cost;
            best_is_search_ = false;
            std::copy(colors.begin(), colors.end(), best_path_.begin());
            record_incumbent();
        }
    }

    void offer_hold() {
        std::vector<ControlAction> hold;
        Node state = stack_[0];
        for (int k = 0; k < P_; ++k) {
            Colors c{};
            continuation_colors(state, c);
            hold.emplace_back(std::vector<LightColor>(c.begin(), c.begin() + n_));
            Node next;
            advance(state, c, k, next);
            state = next;
        }
        offer(hold);
    }

    void run() {
        start_ = Clock::now();
        dfs(0, 0);
    }

    bool aborted() const { return aborted_; }
    bool has_incumbent() const { return best_ < kInf; }
    std::int64_t nodes() const { return nodes_; }
    double objective() const { return static_cast<double>(best_ - offset_) / w_.scale; }
    const std::vector<IncumbentRecord>& history() const { return history_; }

    std::vector<ControlAction> best_actions() const {
        std::vector<ControlAction> out;
        out.reserve(P_);
        for (const auto& c : best_path_) out.emplace_back(std::vector<LightColor>(c.begin(), c.begin() + n_));
        return out;
    }

    // Shifted-cost lower bound on everything after `depth` for `node`.
    std::int64_t bound(const Node& node, int depth) const {
        const int remaining = P_ - depth;
        const int free_steps = C_ - depth;
        std::int64_t total = 0;
        for (int i = 0; i < n_; ++i) {
            int first_green = earliest_green(node, i);
            if (first_green > free_steps && spec_.amber_period[i] == 0) first_green = remaining + 1;
            int q = node.q[i];
            int tw = node.tw[i];
            std::int64_t cost = 0;
            for (int r = 1; r <= remaining; ++r) {
                const int a = arrivals_[(depth + r - 1) * n_ + i];
                if (r < first_green) {
                    q += a;
                    tw = q >= 1 ? tw + 1 : 0;
                    cost += w_.queue * q + w_.wait * tw + w_.stops * a + w_.not_green;
                } else {
                    const int f = std::min(spec_.max_flow[i], q + a);
                    q += a - f;
                    cost += w_.queue * q;
                }
            }
            total += cost + w_.flow * q;
        }
        return total;
    }

    Node from_plant(const PlantState& s) const {
        Node node;
        for (int i = 0; i < n_; ++i) {
            node.color[i] = s.action[i];
            node.q[i] = s.q[i];
            node.tg[i] = std::min(s.t_g[i], spec_.min_green[i]);
            node.ty[i] = s.t_y[i];
            node.ta[i] = s.t_a[i];
            node.tng[i] = std::min(s.t_ng[i], cap_ng_[i]);
            node.tw[i] = s.t_w[i];
        }
        return node;
    }

    std::int64_t offset() const { return offset_; }
    double scale() const { return w_.scale; }

private:
    // Earliest step (1 = next) at which signal i may be green, from its own
    // timers and from the green-interval and conflict constraints of the
    // other signals.
    int earliest_green(const Node& s, int i) const {
        const int py = spec_.yellow_period[i];
        const int pa = spec_.amber_period[i];
        int e = 1;
        switch (s.color[i]) {
            case LightColor::Green: e = 1; break;
            case LightColor::Yellow: e = std::max(py - s.ty[i], 0) + 2 + pa; break;
            case LightColor::Amber: e = std::max(pa - s.ta[i], 0) + 1; break;
            case LightColor::Red: e = 1 + pa; break;
        }
        for (int j = 0; j < n_; ++j) {
            if (j == i) continue;
            const int gap = spec_.green_interval[j][i];
            const bool conflicting = spec_.conflict[i][j] != 0;
            if (gap <= 0 && !conflicting) continue;
            int k = 1;
            switch (s.color[j]) {
                case LightColor::Green: {
                    const int leave = 1 + std::max(0, spec_.min_green[j] - s.tg[j]);
                    k = leave + gap;
                    if (conflicting) k = std::max(k, leave + spec_.yellow_period[j]);
                    break;
                }
                case LightColor::Amber: {
                    const int green_at = std::max(spec_.amber_period[j] - s.ta[j], 0) + 1;
                    const int leave = green_at + std::max(spec_.min_green[j], 1);
                    k = leave + gap;
                    if (conflicting) k = std::max(k, leave + spec_.yellow_period[j]);
                    break;
                }
                case LightColor::Yellow:
                    k = gap - s.tng[j] + 1;
                    if (conflicting) k = std::max(k, std::max(spec_.yellow_period[j] - s.ty[j], 0) + 1);
                    break;
                case LightColor::Red: k = gap - s.tng[j] + 1; break;
            }
            e = std::max(e, k);
        }
        return e;
    }

    std::int64_t advance(const Node& in, const Colors& colors, int k, Node& out) const {
        std::int64_t cost = 0;
        const int* a = &arrivals_[k * n_];
        for (int i = 0; i < n_; ++i) {
            const LightColor c = colors[i];
            const bool green = c == LightColor::Green;
            out.color[i] = c;
            const int f = green ? std::min(spec_.max_flow[i], in.q[i] + a[i]) : 0;
            out.q[i] = in.q[i] + a[i] - f;
            out.tg[i] = green ? std::min(in.tg[i] + 1, spec_.min_green[i]) : 0;
            out.ty[i] = c == LightColor::Yellow ? in.ty[i] + 1 : 0;
            out.ta[i] = c == LightColor::Amber ? in.ta[i] + 1 : 0;
            out.tng[i] = green ? 0 : std::min(in.tng[i] + 1, cap_ng_[i]);
            out.tw[i] = (!green && out.q[i] >= 1) ? in.tw[i] + 1 : 0;
            if (!green) cost += w_.stops * a[i] + w_.not_green;
            cost += w_.queue * out.q[i] + w_.wait * out.tw[i];
        }
        return cost;
    }

    std::int64_t terminal(const Node& s) const {
        std::int64_t total = 0;
        for (int i = 0; i < n_; ++i) total += s.q[i];
        return w_.flow * total;
    }

    void continuation_colors(const Node& s, Colors& c) const {
        for (int i = 0; i < n_; ++i) {
            c[i] = s.color[i];
            if (c[i] == LightColor::Yellow && s.ty[i] >= spec_.yellow_period[i]) c[i] = LightColor::Red;
            if (c[i] == LightColor::Amber && s.ta[i] >= spec_.amber_period[i]) c[i] = LightColor::Green;
        }
    }

    bool matches_continuation(const Node& s, const Colors& c) const {
        Colors expected{};
        continuation_colors(s, expected);
        return std::equal(c.begin(), c.begin() + n_, expected.begin());
    }

    bool green_allowed(const Node& s, int j) const {
        for (int i = 0; i < n_; ++i) {
            if (i != j && spec_.green_interval[i][j] > s.tng[i]) return false;
        }
        return true;
    }

    // Conflict and green-interval checks of a continuation step; the
    // per-signal rules hold by construction of the continuation policy.
    bool joint_legal(const Node& s, const Colors& c) const {
        unsigned blocking = 0;
        for (int i = 0; i < n_; ++i) {
            if (c[i] == LightColor::Red) continue;
            if (conflict_mask_[i] & blocking) return false;
            blocking |= 1u << i;
            if (c[i] == LightColor::Green && !green_allowed(s, i)) return false;
        }
        return true;
    }

    struct SignalOptions {
        std::array<std::array<LightColor, 2>, kMaxSignals> color;
        std::array<int, kMaxSignals> count;
    };

    void build_options(const Node& s, SignalOptions& opt) const {
        for (int i = 0; i < n_; ++i) {
            auto& o = opt.color[i];
            int m = 0;
            auto add = [&](LightColor c) {
                if (c == LightColor::Green && !green_allowed(s, i)) return;
                o[m++] = c;
            };
            switch (s.color[i]) {
                case LightColor::Green:
                    add(LightColor::Green);
                    if (s.tg[i] >= spec_.min_green[i]) add(LightColor::Yellow);
                    break;
                case LightColor::Yellow:
                    add(s.ty[i] < spec_.yellow_period[i] ? LightColor::Yellow : LightColor::Red);
                    break;
                case LightColor::Amber:
                    add(s.ta[i] < spec_.amber_period[i] ? LightColor::Amber : LightColor::Green);
                    break;
                case LightColor::Red:
                    add(spec_.amber_period[i] > 0 ? LightColor::Amber : LightColor::Green);
                    add(LightColor::Red);
                    break;
            }
            opt.count[i] = m;
        }
    }

    void record_incumbent() {
        const double t = std::chrono::duration<double>(Clock::now() - start_).count();
        history_.push_back({started_ ? t : 0.0, objective()});
    }

    bool limit_hit() {
        if (nodes_ >= node_limit_) return true;
        if (deadline_ && (nodes_ & 1023) == 0 && Clock::now() >= *deadline_) return true;
        return false;
    }

    bool improves(std::int64_t cost) const { return cost < best_ || (cost == best_ && !best_is_search_); }

    bool pruned_by_bound(std::int64_t lb) const { return lb > best_ || (lb == best_ && best_is_search_); }

    void signature(const Node& s, std::string& key) const {
        key.clear();
        for (int i = 0; i < n_; ++i) {
            key.push_back(static_cast<char>(s.color[i]));
            for (int v : {s.tg[i], s.ty[i], s.ta[i], s.tng[i]}) {
                key.push_back(static_cast<char>(v & 0xff));
                key.push_back(static_cast<char>((v >> 8) & 0xff));
            }
        }
    }

    // True when an earlier node at this depth with the same light signature
    // is no worse in cost, queues and wait timers. Otherwise the node is
    // recorded and entries it dominates are dropped.
    bool dominated(int depth, const Node& s, std::int64_t g) {
        signature(s, key_);
        auto& bucket = dominance_[depth][key_];
        const int m = 2 * n_;
        std::array<int, 2 * kMaxSignals> v{};
        for (int i = 0; i < n_; ++i) {
            v[i] = s.q[i];
            v[n_ + i] = s.tw[i];
        }
        for (const auto& e : bucket) {
            if (e.g > g) continue;
            bool all = true;
            for (int t = 0; t < m && all; ++t) all = e.v[t] <= v[t];
            if (all) return true;
        }
        std::erase_if(bucket, [&](const DomEntry& e) {
            if (g > e.g) return false;
            for (int t = 0; t < m; ++t) {
                if (v[t] > e.v[t]) return false;
            }
            return true;
        });
        bucket.push_back({g, v});
        return false;
    }

    void leaf(std::int64_t g) {
        Node state = stack_[C_];
        for (int k = C_; k < P_; ++k) {
            continuation_colors(state, path_[k]);
            if (!joint_legal(state, path_[k])) return;
            Node next;
            g += advance(state, path_[k], k, next);
            state = next;
        }
        g += terminal(state);
        if (improves(g)) {
            best_ = g;
            best_is_search_ = true;
            std::copy(path_.begin(), path_.end(), best_path_.begin());
            record_incumbent();
        }
    }

    void expand(int depth, int signal, unsigned blocking, std::int64_t g) {
        if (aborted_) return;
        const auto& opt = options_[depth];
        if (signal == n_) {
            ++nodes_;
            if (limit_hit()) {
                aborted_ = true;
                return;
            }
            Node& child = stack_[depth + 1];
            const std::int64_t g_child = g + advance(stack_[depth], path_[depth], depth, child);
            if (dominated(depth + 1, child, g_child)) return;
            if (depth + 1 < C_ && pruned_by_bound(g_child + bound(child, depth + 1))) return;
            dfs(depth + 1, g_child);
            return;
        }
        for (int k = 0; k < opt.count[signal]; ++k) {
            const LightColor c = opt.color[signal][k];
            unsigned next_blocking = blocking;
            if (c != LightColor::Red) {
                if (conflict_mask_[signal] & blocking) continue;
                next_blocking |= 1u << signal;
            }
            path_[depth][signal] = c;
            expand(depth, signal + 1, next_blocking, g);
            if (aborted_) return;
        }
    }

    void dfs(int depth, std::int64_t g) {
        started_ = true;
        if (depth == C_) {
            leaf(g);
            return;
        }
        build_options(stack_[depth], options_[depth]);
        expand(depth, 0, 0u, g);
    }

    const HorizonProblem& p_;
    const IntersectionSpec& spec_;
    int n_, P_, C_;
    ScaledWeights w_;
    std::vector<int> cap_ng_;
    std::vector<unsigned> conflict_mask_;
    std::vector<int> arrivals_;
    std::int64_t offset_ = 0;

    std::vector<Node> stack_;
    std::vector<Colors> path_;
    std::vector<Colors> best_path_;
    std::vector<SignalOptions> options_;
    std::vector<std::unordered_map<std::string, std::vector<DomEntry>>> dominance_;
    std::string key_;

    std::int64_t best_ = kInf;
    bool best_is_search_ = false;
    std::int64_t nodes_ = 0;
    std::int64_t node_limit_;
    std::optional<Clock::time_point> deadline_;
    Clock::time_point start_ = Clock::now();
    bool started_ = false;
    bool aborted_ = false;
    std::vector<IncumbentRecord> history_;
};

}  // namespace

double earliest_green_bound(const PlantState& state, const std::vector<ArrivalVector>& remaining,
                            int free_steps, const ObjectiveWeights& weights,
                            const IntersectionSpec& spec) {
    HorizonProblem p;
    p.spec = spec;
    p.initial = state;
    p.arrivals = remaining;
    p.config.prediction_horizon = static_cast<int>(remaining.size());
    p.config.control_horizon = std::clamp(free_steps, 1, std::max(1, p.config.prediction_horizon));
    p.config.weights = weights;
    if (remaining.empty()) return 0.0;
    BranchAndBound search(p);
    const std::int64_t shifted = search.bound(search.from_plant(state), 0);
    return static_cast<double>(shifted - search.offset()) / search.scale();
}

SolveReport solve(const HorizonProblem& problem, const std::vector<ControlAction>* warm) {
    validate(problem);
    const auto started = Clock::now();
    BranchAndBound search(problem);
    search.offer_hold();
    if (warm) search.offer(*warm);
    search.run();
    if (!search.has_incumbent()) throw InfeasibleError("no legal schedule exists for this horizon problem");

    SolveReport report;
    report.schedule.actions = search.best_actions();
    report.schedule.objective = search.objective();
    evaluate_schedule(problem, report.schedule.actions, &report.schedule.per_step_cost);
    report.nodes_explored = search.nodes();
    report.proven_optimal = !search.aborted();
    report.incumbent_history = search.history();

    const auto violations = check_schedule(problem.initial, report.schedule.actions, problem.arrivals, problem.spec);
    if (!violations.empty()) {
        throw std::logic_error("solver produced an illegal schedule: " + describe(violations.front()));
    }
    report.wall_time = Clock::now() - started;
    return report;
}

void for_each_legal_schedule(const HorizonProblem& problem,
                             const std::function<void(const std::vector<ControlAction>&)>& visit,
                             std::int64_t node_cap) {
    validate(problem);
    const int n = problem.spec.n;
    const int P = problem.config.prediction_horizon;
    const int C = problem.config.control_horizon;
    const auto table = derive_transitions(problem.spec);

    int combos = 1;
    for (int i = 0; i < n; ++i) combos *= 4;

    std::vector<ControlAction> actions(static_cast<std::size_t>(P));
    std::int64_t nodes = 0;

    std::function<void(int, const PlantState&)> recurse = [&](int k, const PlantState& state) {
        if (k == P) {
            visit(actions);
            return;
        }
        auto try_action = [&](const ControlAction& a) {
            if (++nodes > node_cap) throw EnumerationCapExceeded("enumeration exceeded node cap");
            if (!check_step(state, a, problem.spec, table).empty()) return;
            actions[k] = a;
            recurse(k + 1, step(state, a, problem.arrivals[k], problem.spec));
        };
        if (k >= C) {
            try_action(continuation_action(state, problem.spec));
            return;
        }
        // Signal 0 is the most significant digit so candidates come in
        // lexicographic color order.
        for (int code = 0; code < combos; ++code) {
            ControlAction a(n, LightColor::Red);
            int rest = code;
            for (int i = n - 1; i >= 0; --i) {
                a.colors[i] = static_cast<LightColor>(rest % 4);
                rest /= 4;
            }
            try_action(a);
        }
    };
    recurse(0, problem.initial);
}

EnumerationResult enumerate_legal(const HorizonProblem& problem, std::int64_t node_cap) {
    EnumerationResult result;
    const ScaledWeights w = scale_weights(problem.config.weights);
    // Integer costs so ties are exact and the first minimum found is the
    // lexicographically smallest one.
    auto exact_cost = [&](const std::vector<ControlAction>& actions) {
        std::int64_t total = 0;
        PlantState state = problem.initial;
        for (std::size_t k = 0; k < actions.size(); ++k) {
            state = step(state, actions[k], problem.arrivals[k], problem.spec);
            for (int i = 0; i < state.size(); ++i) {
                total += w.queue * state.q[i] + w.wait * state.t_w[i] + w.stops * state.s[i] -
                         w.flow * state.f[i] + (state.action.green(i) ? 0 : w.not_green);
            }
        }
        return total;
    };
    std::int64_t best = 0;
    bool found = false;
    for_each_legal_schedule(
        problem,
        [&](const std::vector<ControlAction>& actions) {
            ++result.legal_schedules;
            const std::int64_t cost = exact_cost(actions);
            if (!found || cost < best) {
                found = true;
                best = cost;
                result.best_actions = actions;
            }
        },
        node_cap);
    if (!found) throw InfeasibleError("no legal schedule exists for this horizon problem");
    result.best_objective = static_cast<double>(best) / w.scale;
    return result;
}

std::pair<ControlAction, SolveReport> mpc_step(const PlantState& current,
                                               const std::vector<ArrivalVector>& forecast,
                                               const MpcConfig& config, const IntersectionSpec& spec,
                                               const Schedule* previous) {
    validate(config);
    HorizonProblem problem;
    problem.spec = spec;
    problem.initial = current;
    problem.config = config;
    problem.arrivals = forecast;
    problem.arrivals.resize(static_cast<std::size_t>(config.prediction_horizon),
                            ArrivalVector(static_cast<std::size_t>(spec.n), 0));

    std::vector<ControlAction> shifted;
    if (previous && previous->actions.size() >= 2) {
        shifted.assign(previous->actions.begin() + 1, previous->actions.end());
        shifted.resize(std::min(shifted.size(), static_cast<std::size_t>(config.prediction_horizon)));
        PlantState state = current;
        for (std::size_t k = 0; k < shifted.size(); ++k) state = step(state, shifted[k], problem.arrivals[k], spec);
        while (static_cast<int>(shifted.size()) < config.prediction_horizon) {
            shifted.push_back(continuation_action(state, spec));
            state = step(state, shifted.back(), problem.arrivals[shifted.size() - 1], spec);
        }
    }
    SolveReport report = solve(problem, shifted.empty() ? nullptr : &shifted);
    ControlAction first = report.schedule.actions.front();
    return {std::move(first), std::move(report)};
}

}  // namespace tsc
