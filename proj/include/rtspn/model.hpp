#pragma once

// Domain types for a frame-based real-time processing network: tasks that
// draw exponential processing times, the resources they hold while running,
// and the per-frame arrival law.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rtspn/error.hpp"

namespace rtspn {

using TaskId = int;
using ResourceId = std::string;

/// Sorted, duplicate-free list of task ids.
using TaskSet = std::vector<TaskId>;

/// Probability of each arrival subset within one frame.
using SubsetDistributionMap = std::map<TaskSet, double>;

struct TaskSpec {
    TaskId id{};
    double rate{};         // completion rate; processing time ~ Exp(rate)
    double requirement{};  // required on-time completions per frame
    std::set<ResourceId> resources;
};

/// Every task generates a job at the start of every frame.
struct EveryFrame {};

/// Each task arrives independently with its own probability.
struct IndependentBernoulli {
    std::map<TaskId, double> probability;
};

/// Explicit joint law over arrival subsets. Subsets are canonical (sorted)
/// after validation and the entries are kept in lexicographic order.
struct SubsetDistribution {
    std::vector<std::pair<TaskSet, double>> entries;
};

/// Frame-to-frame Markov traffic. Each state emits a fixed arrival subset;
/// analytic quantities use the stationary law.
struct MarkovArrivals {
    std::vector<TaskSet> state_arrivals;
    std::vector<std::vector<double>> transition;
};

using ArrivalModel = std::variant<EveryFrame, IndependentBernoulli, SubsetDistribution, MarkovArrivals>;

struct SystemSpec {
    std::vector<TaskSpec> tasks;  // sorted by id after validation
    std::set<ResourceId> resources;
    double frame_length{1.0};
    ArrivalModel arrivals{EveryFrame{}};

    const TaskSpec& task(TaskId id) const;
    const TaskSpec* find_task(TaskId id) const;
    std::vector<TaskId> task_ids() const;
    bool single_resource() const { return resources.size() == 1; }
};

inline constexpr double kDistributionTolerance = 1e-12;

/// Returns the spec in canonical form (tasks sorted by id, subsets sorted)
/// or throws ValidationError listing every violated invariant.
SystemSpec validate_spec(SystemSpec raw);

/// Joint law of the arriving set intersected with `tasks`. Zero-probability
/// subsets are omitted.
SubsetDistributionMap arrival_subset_distribution(const ArrivalModel& model,
                                                  std::span<const TaskId> tasks);

/// r_n, the marginal of arrival_subset_distribution over the subsets that
/// contain `task`. Throws UnknownTask when `task` is not in `tasks`.
double mean_arrival_rate(const ArrivalModel& model, std::span<const TaskId> tasks, TaskId task);
double mean_arrival_rate(const SystemSpec& spec, TaskId task);

/// Stationary law of the traffic chain (power iteration, then normalised).
std::vector<double> stationary_distribution(const MarkovArrivals& chain);

/// All subsets of `tasks` ordered by size, then lexicographically.
std::vector<TaskSet> enumerate_subsets(std::span<const TaskId> tasks, bool include_empty);

bool contains(const TaskSet& set, TaskId id);
TaskSet intersect(const TaskSet& a, const TaskSet& b);
std::string format_subset(const TaskSet& set, char separator = ';');

}  // namespace rtspn
