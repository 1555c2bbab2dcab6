#include "tsc/milp.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tsc::milp {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& t : o.terms) terms.push_back({t.var, -t.coef});
    constant -= o.constant;
    return *this;
}

LinExpr& LinExpr::operator*=(double k) {
    for (auto& t : terms) t.coef *= k;
    constant *= k;
    return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double k, LinExpr a) { return a *= k; }

namespace {

std::vector<Term> merged(const std::vector<Term>& terms) {
    std::map<int, double> sum;
    for (const auto& t : terms) sum[t.var] += t.coef;
    std::vector<Term> out;
    for (const auto& [var, coef] : sum) {
        if (coef != 0.0) out.push_back({var, coef});
    }
    return out;
}

bool satisfied(double lhs, Sense sense, double rhs, double tol) {
    switch (sense) {
        case Sense::LessEqual: return lhs <= rhs + tol;
        case Sense::GreaterEqual: return lhs >= rhs - tol;
        case Sense::Equal: return std::abs(lhs - rhs) <= tol;
    }
    return false;
}

}  // namespace

int Model::add_variable(std::string name, VarKind kind, double lower, double upper) {
    if (index_.count(name)) throw std::invalid_argument("duplicate variable " + name);
    const int id = static_cast<int>(variables_.size());
    index_.emplace(name, id);
    variables_.push_back({std::move(name), kind, lower, upper});
    return id;
}

void Model::add_constraint(std::string name, const LinExpr& lhs, Sense sense, const LinExpr& rhs) {
    LinExpr diff = lhs - rhs;
    Constraint row{std::move(name), merged(diff.terms), sense, -diff.constant};
    if (row.terms.empty()) {
        if (!satisfied(0.0, sense, row.rhs, 1e-9)) {
            throw std::invalid_argument("constant row " + row.name + " is infeasible; initial state inconsistent");
        }
        return;
    }
    constraints_.push_back(std::move(row));
}

void Model::set_objective(const LinExpr& objective) {
    objective_ = merged(objective.terms);
    objective_constant_ = objective.constant;
}

int Model::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no variable named " + name);
    return it->second;
}

std::size_t Model::count_rows(const std::string& prefix) const {
    return static_cast<std::size_t>(std::count_if(constraints_.begin(), constraints_.end(), [&](const Constraint& c) {
        return c.name.compare(0, prefix.size(), prefix) == 0;
    }));
}

void Model::check_well_formed() const {
    const int n = static_cast<int>(variables_.size());
    auto ok = [n](const std::vector<Term>& terms) {
        return std::all_of(terms.begin(), terms.end(), [n](const Term& t) { return t.var >= 0 && t.var < n; });
    };
    if (!ok(objective_)) throw std::logic_error("objective references an undeclared variable");
    for (const auto& c : constraints_) {
        if (!ok(c.terms)) throw std::logic_error("row " + c.name + " references an undeclared variable");
    }
    if (index_.size() != variables_.size()) throw std::logic_error("variable names are not unique");
}

BigM big_m_for(const HorizonProblem& problem) {
    BigM m;
    double total = 0.0;
    for (int v : problem.initial.q) total += v;
    for (const auto& a : problem.arrivals) {
        for (int v : a) total += v;
    }
    m.queue = std::max(1.0, total);
    int widest = 0;
    const auto& s = problem.initial;
    for (const auto* v : {&s.t_g, &s.t_y, &s.t_a, &s.t_ng, &s.t_w}) {
        for (int x : *v) widest = std::max(widest, x);
    }
    m.timer = problem.config.prediction_horizon + widest;
    constexpr double kLimit = 1e9;
    if (m.queue > kLimit || m.timer > kLimit) {
        throw std::invalid_argument("big-M bounds exceed 1e9; instance too large to encode exactly");
    }
    return m;
}

namespace {

constexpr std::array<char, 4> kColorTag = {'g', 'y', 'a', 'r'};

std::string suffix(int i, int k) { return "_" + std::to_string(i) + "_" + std::to_string(k); }

struct StepVars {
    std::array<int, 4> d{};
    int f = 0, q = 0, s = 0, tg = 0, ty = 0, ta = 0, tng = 0, tw = 0, u = 0, z = 0;
};

}  // namespace

Model encode(const HorizonProblem& problem) {
    validate(problem);
    const auto& spec = problem.spec;
    const auto& s0 = problem.initial;
    const int n = spec.n;
    const int P = problem.config.prediction_horizon;
    const int C = problem.config.control_horizon;
    const auto& w = problem.config.weights;
    const BigM M = big_m_for(problem);
    const auto table = derive_transitions(spec);

    Model model;
    // vars[k][i] for k = 1..P; index 0 unused.
    std::vector<std::vector<StepVars>> vars(static_cast<std::size_t>(P) + 1, std::vector<StepVars>(n));
    for (int k = 1; k <= P; ++k) {
        for (int i = 0; i < n; ++i) {
            auto& v = vars[k][i];
            const std::string sx = suffix(i, k);
            for (int c = 0; c < 4; ++c) {
                v.d[c] = model.add_variable(std::string("d_") + kColorTag[c] + sx, VarKind::Binary, 0, 1);
            }
            v.f = model.add_variable("f" + sx, VarKind::Integer, 0, spec.max_flow[i]);
            v.q = model.add_variable("q" + sx, VarKind::Integer, 0, M.queue);
            v.s = model.add_variable("s" + sx, VarKind::Integer, 0, problem.arrivals[k - 1][i]);
            v.tg = model.add_variable("tg" + sx, VarKind::Integer, 0, M.timer);
            v.ty = model.add_variable("ty" + sx, VarKind::Integer, 0, M.timer);
            v.ta = model.add_variable("ta" + sx, VarKind::Integer, 0, M.timer);
            v.tng = model.add_variable("tng" + sx, VarKind::Integer, 0, M.timer);
            v.tw = model.add_variable("tw" + sx, VarKind::Integer, 0, M.timer);
            v.u = model.add_variable("u" + sx, VarKind::Binary, 0, 1);
            v.z = model.add_variable("z" + sx, VarKind::Binary, 0, 1);
        }
    }

    using E = LinExpr;
    auto X = [](int index) { return E::var(index); };
    // Previous-step quantities: constants from the initial state at k = 1.
    auto d_prev = [&](int k, int i, int c) -> E {
        if (k == 1) return E(color_index(s0.action[i]) == c ? 1.0 : 0.0);
        return X(vars[k - 1][i].d[c]);
    };
    auto prev = [&](int k, int i, int StepVars::*field, const std::vector<int>& initial) -> E {
        if (k == 1) return E(initial[i]);
        return X(vars[k - 1][i].*field);
    };
    const Sense LE = Sense::LessEqual, GE = Sense::GreaterEqual, EQ = Sense::Equal;

    for (int k = 1; k <= P; ++k) {
        const auto& a = problem.arrivals[k - 1];
        for (int i = 0; i < n; ++i) {
            const auto& v = vars[k][i];
            const std::string sx = suffix(i, k);
            const E dg = X(v.d[0]), dy = X(v.d[1]), da = X(v.d[2]), dr = X(v.d[3]);
            const E not_green = 1.0 - dg;

            model.add_constraint("single" + sx, dg + dy + da + dr, EQ, 1.0);

            for (int from = 0; from < 4; ++from) {
                for (int to = 0; to < 4; ++to) {
                    if (table.allowed(i, kAllColors[from], kAllColors[to])) continue;
                    model.add_constraint(std::string("trans_") + kColorTag[from] + kColorTag[to] + sx,
                                         d_prev(k, i, from) + X(v.d[to]), LE, 1.0);
                }
            }

            // Yellow and amber: exact dwell plus the timer recursion rows.
            for (int c : {1, 2}) {
                const double period = c == 1 ? spec.yellow_period[i] : spec.amber_period[i];
                const int timer = c == 1 ? v.ty : v.ta;
                const E t = X(timer);
                const E t_prev = c == 1 ? prev(k, i, &StepVars::ty, s0.t_y) : prev(k, i, &StepVars::ta, s0.t_a);
                const std::string tag = std::string("timing_") + kColorTag[c];
                model.add_constraint(tag + "_dwell" + sx, period * (d_prev(k, i, c) - X(v.d[c])), LE, t_prev);
                model.add_constraint(tag + "_limit" + sx, t, LE, period * X(v.d[c]));
                model.add_constraint(tag + "_up" + sx, t, LE, t_prev + 1.0);
                model.add_constraint(tag + "_lo" + sx, t, GE, t_prev + 1.0 - M.timer * (1.0 - X(v.d[c])));
            }

            // Green and not-green timers.
            {
                const E t = X(v.tg);
                const E t_prev = prev(k, i, &StepVars::tg, s0.t_g);
                model.add_constraint("tg_off" + sx, t, LE, M.timer * dg);
                model.add_constraint("tg_up" + sx, t, LE, t_prev + 1.0);
                model.add_constraint("tg_lo" + sx, t, GE, t_prev + 1.0 - M.timer * (1.0 - dg));
            }
            {
                const E t = X(v.tng);
                const E t_prev = prev(k, i, &StepVars::tng, s0.t_ng);
                model.add_constraint("tng_off" + sx, t, LE, M.timer * not_green);
                model.add_constraint("tng_up" + sx, t, LE, t_prev + 1.0);
                model.add_constraint("tng_lo" + sx, t, GE, t_prev + 1.0 - M.timer * dg);
            }

            if (spec.min_green[i] > 0) {
                const double mg = spec.min_green[i];
                model.add_constraint("mingreen" + sx, mg * (d_prev(k, i, 0) - dg), LE,
                                     prev(k, i, &StepVars::tg, s0.t_g));
            }

            // Discharge: f = green * min(max_flow, arrivals + q_prev). u = 1
            // selects the capacity branch.
            {
                const double cap = spec.max_flow[i];
                const E f = X(v.f), u = X(v.u);
                const E demand = a[i] + prev(k, i, &StepVars::q, s0.q);
                model.add_constraint("flow_cap" + sx, f, LE, cap * dg);
                model.add_constraint("flow_demand" + sx, f, LE, demand);
                model.add_constraint("flow_min_cap" + sx, f, GE, cap - cap * (1.0 - u) - cap * (1.0 - dg));
                model.add_constraint("flow_min_demand" + sx, f, GE, demand - M.queue * u - M.queue * (1.0 - dg));
                model.add_constraint("queue" + sx, X(v.q), EQ, demand - f);
            }

            // Queue indicator and wait timer.
            {
                const E q = X(v.q), z = X(v.z), tw = X(v.tw);
                const E tw_prev = prev(k, i, &StepVars::tw, s0.t_w);
                model.add_constraint("ind_lo" + sx, q, GE, z);
                model.add_constraint("ind_hi" + sx, q, LE, M.queue * z);
                model.add_constraint("wait_queue" + sx, tw, LE, M.timer * z);
                model.add_constraint("wait_green" + sx, tw, LE, M.timer * not_green);
                model.add_constraint("wait_up" + sx, tw, LE, tw_prev + 1.0);
                model.add_constraint("wait_lo" + sx, tw, GE, tw_prev + 1.0 - M.timer * (1.0 - z) - M.timer * dg);
            }

            model.add_constraint("stops" + sx, X(v.s), EQ, a[i] * not_green);

            if (k > C) {
                model.add_constraint("hold_g" + sx, d_prev(k, i, 0), LE, dg);
                model.add_constraint("hold_r" + sx, d_prev(k, i, 3), LE, dr);
            }
        }

        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (spec.conflict[i][j] != 1) continue;
                const auto& vi = vars[k][i];
                const auto& vj = vars[k][j];
                E blocking = X(vi.d[0]) + X(vi.d[1]) + X(vi.d[2]) + X(vj.d[0]) + X(vj.d[1]) + X(vj.d[2]);
                model.add_constraint("conflict_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                         std::to_string(k),
                                     blocking, LE, 1.0);
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const int gap = spec.green_interval[i][j];
                if (i == j || gap <= 0) continue;
                model.add_constraint("gap_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k),
                                     static_cast<double>(gap) * X(vars[k][j].d[0]), LE,
                                     prev(k, i, &StepVars::tng, s0.t_ng));
            }
        }
    }

    E objective;
    for (int k = 1; k <= P; ++k) {
        for (int i = 0; i < n; ++i) {
            const auto& v = vars[k][i];
            objective += w.queue * X(v.q);
            objective += w.wait * X(v.tw);
            objective += w.stops * X(v.s);
            objective -= w.flow * X(v.f);
            objective += w.not_green * (X(v.d[1]) + X(v.d[2]) + X(v.d[3]));
        }
    }
    model.set_objective(objective);
    model.check_well_formed();
    return model;
}

AssignmentCheck evaluate_assignment(const Model& model, const Assignment& assignment) {
    const auto& vars = model.variables();
    std::vector<double> x(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) {
        auto it = assignment.find(vars[k].name);
        if (it == assignment.end()) throw std::invalid_argument("assignment lacks variable " + vars[k].name);
        x[k] = it->second;
    }
    constexpr double kTol = 1e-6;
    AssignmentCheck out;
    for (std::size_t k = 0; k < vars.size(); ++k) {
        const auto& v = vars[k];
        const bool integral = v.kind != VarKind::Continuous;
        if (x[k] < v.lower - kTol || x[k] > v.upper + kTol ||
            (integral && std::abs(x[k] - std::round(x[k])) > kTol)) {
            out.violated_rows.push_back("bound:" + v.name);
        }
    }
    for (const auto& row : model.constraints()) {
        double lhs = 0.0;
        for (const auto& t : row.terms) lhs += t.coef * x[t.var];
        if (!satisfied(lhs, row.sense, row.rhs, kTol)) out.violated_rows.push_back(row.name);
    }
    out.objective = model.objective_constant();
    for (const auto& t : model.objective()) out.objective += t.coef * x[t.var];
    out.feasible = out.violated_rows.empty();
    return out;
}

Assignment embed_trace(const HorizonProblem& problem, const std::vector<ControlAction>& actions) {
    const auto& spec = problem.spec;
    if (static_cast<int>(actions.size()) != problem.config.prediction_horizon) {
        throw std::invalid_argument("trace must cover the prediction horizon");
    }
    Assignment x;
    PlantState state = problem.initial;
    for (std::size_t k = 0; k < actions.size(); ++k) {
        const PlantState prev_state = state;
        state = step(state, actions[k], problem.arrivals[k], spec);
        for (int i = 0; i < spec.n; ++i) {
            const std::string sx = suffix(i, static_cast<int>(k) + 1);
            for (int c = 0; c < 4; ++c) {
                x[std::string("d_") + kColorTag[c] + sx] = color_index(actions[k][i]) == c ? 1.0 : 0.0;
            }
            x["f" + sx] = state.f[i];
            x["q" + sx] = state.q[i];
            x["s" + sx] = state.s[i];
            x["tg" + sx] = state.t_g[i];
            x["ty" + sx] = state.t_y[i];
            x["ta" + sx] = state.t_a[i];
            x["tng" + sx] = state.t_ng[i];
            x["tw" + sx] = state.t_w[i];
            const int demand = problem.arrivals[k][i] + prev_state.q[i];
            x["u" + sx] = spec.max_flow[i] <= demand ? 1.0 : 0.0;
            x["z" + sx] = state.q[i] >= 1 ? 1.0 : 0.0;
        }
    }
    return x;
}

namespace {

std::string number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_terms(std::ostringstream& out, const Model& model, const std::vector<Term>& terms) {
    int on_line = 0;
    for (const auto& t : terms) {
        if (on_line == 8) {
            out << "\n   ";
            on_line = 0;
        }
        out << (t.coef < 0 ? " - " : " + ") << number(std::abs(t.coef)) << ' ' << model.variables()[t.var].name;
        ++on_line;
    }
}

}  // namespace

std::size_t export_lp(const Model& model, std::ostream& sink) {
    std::ostringstream out;
    out << "\\ traffic signal horizon problem\n";
    out << "Minimize\n obj:";
    if (model.objective().empty()) {
        out << " 0 " << (model.variables().empty() ? std::string("x") : model.variables().front().name);
    }
    write_terms(out, model, model.objective());
    out << '\n';
    out << "Subject To\n";
    for (const auto& row : model.constraints()) {
        out << ' ' << row.name << ':';
        write_terms(out, model, row.terms);
        switch (row.sense) {
            case Sense::LessEqual: out << " <= "; break;
            case Sense::GreaterEqual: out << " >= "; break;
            case Sense::Equal: out << " = "; break;
        }
        out << number(row.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : model.variables()) {
        if (v.kind == VarKind::Binary) continue;
        if (std::isinf(v.upper)) {
            out << ' ' << v.name << " >= " << number(v.lower) << '\n';
        } else {
            out << ' ' << number(v.lower) << " <= " << v.name << " <= " << number(v.upper) << '\n';
        }
    }
    auto list = [&](VarKind kind, const char* header) {
        bool any = false;
        int on_line = 0;
        for (const auto& v : model.variables()) {
            if (v.kind != kind) continue;
            if (!any) out << header << '\n';
            any = true;
            out << ' ' << v.name;
            if (++on_line == 10) {
                out << '\n';
                on_line = 0;
            }
        }
        if (any && on_line != 0) out << '\n';
    };
    list(VarKind::Integer, "General");
    list(VarKind::Binary, "Binary");
    out << "End\n";

    const std::string text = out.str();
    sink.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!sink) throw std::runtime_error("failed writing LP model");
    return text.size();
}

}  // namespace tsc::milp
