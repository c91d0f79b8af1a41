#pragma once

// Small dense linear programs. Two-phase tableau simplex with Bland's
// anti-cycling rule; sized for a few dozen variables and a few thousand rows.

#include <cstddef>
#include <vector>

namespace rtspn {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LinearConstraint {
    std::vector<double> coefficients;
    Relation relation{Relation::LessEqual};
    double rhs{0.0};
};

struct LinearProgram {
    std::size_t variables{0};
    std::vector<double> objective;  // maximised
    std::vector<LinearConstraint> constraints;
    std::vector<bool> nonnegative;  // empty means every variable is >= 0

    explicit LinearProgram(std::size_t n = 0) : variables(n), objective(n, 0.0) {}

    void add(std::vector<double> coefficients, Relation relation, double rhs) {
        constraints.push_back({std::move(coefficients), relation, rhs});
    }
    bool is_nonnegative(std::size_t j) const { return nonnegative.empty() || nonnegative[j]; }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status{LpStatus::Infeasible};
    std::vector<double> point;
    double value{0.0};
};

inline constexpr double kLpTolerance = 1e-9;

/// Maximises the objective. Throws MalformedProgram when a row has the wrong
/// width and LpNumericalFailure when the pivot budget is exhausted.
LpSolution lp_max(const LinearProgram& lp, double tolerance = kLpTolerance);

}  // namespace rtspn
