#include "rtspn/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rtspn/error.hpp"

namespace rtspn {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;
constexpr std::size_t kMaxPivots = 200000;

struct Tableau {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<std::size_t> basis;
    std::vector<double> reduced;  // objective row
    double value{0.0};
    std::size_t columns{0};

    void pivot(std::size_t r, std::size_t c) {
        auto& pr = rows[r];
        const double inv = 1.0 / pr[c];
        for (auto& x : pr) x *= inv;
        rhs[r] *= inv;
        pr[c] = 1.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r) continue;
            const double f = rows[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < columns; ++j) rows[i][j] -= f * pr[j];
            rows[i][c] = 0.0;
            rhs[i] -= f * rhs[r];
        }
        const double f = reduced[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j < columns; ++j) reduced[j] -= f * pr[j];
            reduced[c] = 0.0;
            value -= f * rhs[r];
        }
        basis[r] = c;
    }

    void price(const std::vector<double>& cost) {
        reduced.assign(columns, 0.0);
        value = 0.0;
        for (std::size_t j = 0; j < columns; ++j) reduced[j] = -cost[j];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < columns; ++j) reduced[j] += cb * rows[i][j];
            value += cb * rhs[i];
        }
    }

    // Maximises cost over the allowed columns. Returns false when unbounded.
    bool optimise(const std::vector<double>& cost, const std::vector<bool>& allowed) {
        price(cost);
        for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
            std::size_t enter = columns;
            for (std::size_t j = 0; j < columns; ++j) {
                if (allowed[j] && reduced[j] < -kCostEps) {
                    enter = j;
                    break;
                }
            }
            if (enter == columns) return true;

            std::size_t leave = rows.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double a = rows[i][enter];
                if (a <= kPivotEps) continue;
                const double ratio = std::max(rhs[i], 0.0) / a;
                if (leave == rows.size()) {
                    best = ratio;
                    leave = i;
                    continue;
                }
                const double tie = 1e-12 * (1.0 + std::abs(best));
                if (ratio < best - tie) {
                    best = ratio;
                    leave = i;
                } else if (ratio <= best + tie && basis[i] < basis[leave]) {
                    leave = i;
                }
            }
            if (leave == rows.size()) return false;
            pivot(leave, enter);
        }
        throw Error(Errc::LpNumericalFailure, "pivot budget exhausted");
    }
};

}  // namespace

LpSolution lp_max(const LinearProgram& lp, double tolerance) {
    const std::size_t n = lp.variables;
    if (lp.objective.size() != n) throw Error(Errc::MalformedProgram, "objective width differs from variable count");
    if (!lp.nonnegative.empty() && lp.nonnegative.size() != n)
        throw Error(Errc::MalformedProgram, "nonnegativity flags width differs from variable count");
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        if (lp.constraints[i].coefficients.size() != n)
            throw Error(Errc::MalformedProgram, fmt::format("row {} has {} coefficients, expected {}", i,
                                                            lp.constraints[i].coefficients.size(), n));
    }

    // Structural columns: free variables are split into positive and negative parts.
    std::vector<std::size_t> pos(n), neg(n, std::numeric_limits<std::size_t>::max());
    std::size_t columns = 0;
    for (std::size_t j = 0; j < n; ++j) {
        pos[j] = columns++;
        if (!lp.is_nonnegative(j)) neg[j] = columns++;
    }
    const std::size_t structural = columns;

    const std::size_t m = lp.constraints.size();
    std::vector<Relation> rel(m);
    std::vector<double> sign(m, 1.0);
    std::size_t slack_count = 0, artificial_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = lp.constraints[i];
        rel[i] = c.relation;
        if (c.rhs < 0.0) {
            sign[i] = -1.0;
            if (rel[i] == Relation::LessEqual) rel[i] = Relation::GreaterEqual;
            else if (rel[i] == Relation::GreaterEqual) rel[i] = Relation::LessEqual;
        }
        if (rel[i] != Relation::Equal) ++slack_count;
        if (rel[i] != Relation::LessEqual) ++artificial_count;
    }
    const std::size_t first_artificial = structural + slack_count;
    columns = first_artificial + artificial_count;

    Tableau t;
    t.columns = columns;
    t.rows.assign(m, std::vector<double>(columns, 0.0));
    t.rhs.assign(m, 0.0);
    t.basis.assign(m, 0);
    std::size_t next_slack = structural, next_art = first_artificial;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = lp.constraints[i];
        auto& row = t.rows[i];
        for (std::size_t j = 0; j < n; ++j) {
            row[pos[j]] = sign[i] * c.coefficients[j];
            if (neg[j] != std::numeric_limits<std::size_t>::max()) row[neg[j]] = -sign[i] * c.coefficients[j];
        }
        t.rhs[i] = sign[i] * c.rhs;
        if (rel[i] == Relation::LessEqual) {
            row[next_slack] = 1.0;
            t.basis[i] = next_slack++;
        } else {
            if (rel[i] == Relation::GreaterEqual) row[next_slack++] = -1.0;
            row[next_art] = 1.0;
            t.basis[i] = next_art++;
        }
    }

    double scale = 1.0;
    for (double b : t.rhs) scale = std::max(scale, std::abs(b));

    if (artificial_count > 0) {
        std::vector<double> cost(columns, 0.0);
        for (std::size_t j = first_artificial; j < columns; ++j) cost[j] = -1.0;
        std::vector<bool> allowed(columns, true);
        t.optimise(cost, allowed);
        if (t.value < -tolerance * scale) return {LpStatus::Infeasible, {}, 0.0};

        // Drive zero-level artificials out of the basis; drop redundant rows.
        for (std::size_t i = 0; i < t.rows.size();) {
            if (t.basis[i] < first_artificial) {
                ++i;
                continue;
            }
            std::size_t col = first_artificial;
            for (std::size_t j = 0; j < first_artificial; ++j) {
                if (std::abs(t.rows[i][j]) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col < first_artificial) {
                t.pivot(i, col);
                ++i;
            } else {
                t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
                t.rhs.erase(t.rhs.begin() + static_cast<std::ptrdiff_t>(i));
                t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
    }

    std::vector<double> cost(columns, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        cost[pos[j]] = lp.objective[j];
        if (neg[j] != std::numeric_limits<std::size_t>::max()) cost[neg[j]] = -lp.objective[j];
    }
    std::vector<bool> allowed(columns, true);
    for (std::size_t j = first_artificial; j < columns; ++j) allowed[j] = false;
    if (!t.optimise(cost, allowed)) return {LpStatus::Unbounded, {}, 0.0};

    std::vector<double> column_value(columns, 0.0);
    for (std::size_t i = 0; i < t.rows.size(); ++i) column_value[t.basis[i]] = std::max(t.rhs[i], 0.0);
    LpSolution out{LpStatus::Optimal, std::vector<double>(n, 0.0), 0.0};
    for (std::size_t j = 0; j < n; ++j) {
        out.point[j] = column_value[pos[j]];
        if (neg[j] != std::numeric_limits<std::size_t>::max()) out.point[j] -= column_value[neg[j]];
        out.value += lp.objective[j] * out.point[j];
    }
    return out;
}

}  // namespace rtspn
