#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsc/optimizer.hpp"

namespace tsc::milp {

enum class VarKind { Binary, Integer, Continuous };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = 0.0;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

/// Linear expression with a constant part, used while building rows.
struct LinExpr {
    std::vector<Term> terms;
    double constant = 0.0;

    LinExpr() = default;
    LinExpr(double c) : constant(c) {}  // NOLINT(implicit)
    static LinExpr var(int index, double coef = 1.0) {
        LinExpr e;
        e.terms.push_back({index, coef});
        return e;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double k);
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double k, LinExpr a);

class Model {
public:
    int add_variable(std::string name, VarKind kind, double lower, double upper);

    /// Adds `lhs sense rhs`. Constants move to the right-hand side and
    /// repeated variables merge. A row left without variables is checked
    /// for feasibility and dropped; an infeasible constant row throws.
    void add_constraint(std::string name, const LinExpr& lhs, Sense sense, const LinExpr& rhs);

    void set_objective(const LinExpr& objective);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }

    /// Index of a variable by name; throws std::out_of_range when absent.
    int index_of(const std::string& name) const;
    bool has_variable(const std::string& name) const { return index_.count(name) != 0; }

    /// Rows whose name starts with `prefix`.
    std::size_t count_rows(const std::string& prefix) const;

    /// Every referenced index is declared; names are unique.
    void check_well_formed() const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<Term> objective_;
    double objective_constant_ = 0.0;
    std::unordered_map<std::string, int> index_;
};

/// Big-M constants used by an encoding; both dominate the quantities they
/// switch off.
struct BigM {
    double queue = 0.0;
    double timer = 0.0;
};

BigM big_m_for(const HorizonProblem& problem);

/// Mixed-integer linear program of the horizon problem. Row name prefixes:
///   single_  one light per signal         trans_   forbidden transitions
///   timing_  yellow/amber dwell and timer  conflict_ crossing movements
///   gap_     green interval                mingreen_ minimum green
///   flow_ queue_ tg_ tng_ ind_ wait_ stops_ plant recursions
///   hold_    continuation beyond the control horizon
/// Variables are named d_<color>_<signal>_<step> (color g, y, a, r),
/// q_, f_, s_, tg_, ty_, ta_, tng_, tw_ and the auxiliary binaries u_ (which
/// argument of the discharge minimum binds) and z_ (queue non-empty), all
/// suffixed _<signal>_<step> with steps numbered from 1.
Model encode(const HorizonProblem& problem);

using Assignment = std::unordered_map<std::string, double>;

struct AssignmentCheck {
    bool feasible = false;
    double objective = 0.0;
    std::vector<std::string> violated_rows;
};

/// Checks every row to 1e-6 and evaluates the objective. Throws
/// std::invalid_argument naming the first variable the assignment lacks.
AssignmentCheck evaluate_assignment(const Model& model, const Assignment& assignment);

/// Variable values induced by rolling `actions` through the plant.
Assignment embed_trace(const HorizonProblem& problem, const std::vector<ControlAction>& actions);

/// Writes the model in CPLEX LP text format and returns the bytes written.
/// Throws std::runtime_error when the stream fails.
std::size_t export_lp(const Model& model, std::ostream& out);

}  // namespace tsc::milp
