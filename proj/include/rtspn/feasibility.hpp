#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "rtspn/idle.hpp"
#include "rtspn/lp.hpp"
#include "rtspn/model.hpp"
#include "rtspn/reduction.hpp"

namespace rtspn {

/// Per-frame service time a task needs to reach its requirement: q / rate.
double implied_workload(double requirement, double rate);

struct SubsetSlack {
    TaskSet subset;
    double workload{0.0};  // sum of implied workloads over the subset
    IdleEstimate idle;     // E[I_S]
    double load{0.0};      // workload + idle
    double slack{0.0};     // T - load
    bool uncertain{false}; // Monte Carlo idle and |slack| within 4 standard errors
};

enum class Verdict { Feasible, Infeasible, BoundaryUncertain };

struct FeasibilityVerdict {
    bool feasible{false};  // violations empty
    Verdict verdict{Verdict::Infeasible};
    std::vector<SubsetSlack> violations;
    std::vector<SubsetSlack> slack_table;  // every nonempty subset, by size then lexicographic
    double margin{0.0};  // smallest slack; two-resource: best achievable smallest slack
    /// Requirement vector the slack table was evaluated at (reduced ids for
    /// the two-resource check).
    std::map<TaskId, double> evaluated_requirements;
    /// Two-resource only: the reduced requirement vector with the largest q_c*.
    std::optional<std::map<TaskId, double>> witness;
    std::optional<ReducedSystem> reduced;
};

struct FeasibilityOptions {
    IdleOptions idle{};
    std::size_t max_tasks{20};
    AttributionConvention convention{AttributionConvention::Exact};
    double lp_tolerance{kLpTolerance};
};

/// Relative feasibility tolerance: a subset is violated when slack < -1e-9 T.
inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr std::size_t kMaxProgramRows = std::size_t{1} << 16;

/// Sharp single-resource test: sum_{n in S} w_n + E[I_S] <= T for every S.
/// The empty subset is skipped (its slack is identically zero).
FeasibilityVerdict check_single_resource(const SystemSpec& spec, const FeasibilityOptions& options = {});

/// Two-resource test through the reduced system's requirement polytope.
FeasibilityVerdict check_two_resource(const SystemSpec& spec, const FeasibilityOptions& options = {});

/// Dispatches on topology; throws UnsupportedTopology for anything else.
FeasibilityVerdict check_feasibility(const SystemSpec& spec, const FeasibilityOptions& options = {});

/// E[I_S] for every nonempty subset of the spec's tasks, in enumeration order.
std::vector<std::pair<TaskSet, IdleEstimate>> idle_table(const SystemSpec& spec, const IdleOptions& options);

/// The LP over reduced requirements [q_n* in reduced task order]:
/// throughput covers, one capacity row per nonempty reduced subset and
/// nonnegativity. With `margin_variable` an extra free variable t is added
/// to every capacity row and maximised; otherwise q_c* is maximised.
LinearProgram requirement_program(const SystemSpec& original, const ReducedSystem& reduced,
                                  const std::vector<std::pair<TaskSet, IdleEstimate>>& reduced_idle,
                                  bool margin_variable, double capacity_relief = 0.0);

}  // namespace rtspn
