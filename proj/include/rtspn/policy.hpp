#pragma once

// Time-based debt accounting and the online scheduling policies.
//
// Policies are non-clairvoyant: they see arrivals, completions, elapsed
// time and the debt ledger, never a job's hidden processing time.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtspn/model.hpp"
#include "rtspn/reduction.hpp"
#include "rtspn/rng.hpp"

namespace rtspn {

/// d_n(k) = (k - 1) w_n - sum_{j<k} gamma_n(j), kept per task. Debt is not
/// floored; negative values mean the task is ahead of its workload.
class DebtLedger {
public:
    struct Entry {
        TaskId task;
        double workload;            // w_n
        double cumulative_service;  // sum of gamma_n over finished frames
        double debt;                // d_n(k)
    };

    DebtLedger(std::vector<std::pair<TaskId, double>> workloads, double frame_length);
    static DebtLedger for_spec(const SystemSpec& spec);

    /// Closes frame k. `frame_service` is aligned with entries(); each value
    /// must lie in [0, T] (ServiceExceedsFrame otherwise).
    void update(std::span<const double> frame_service);

    std::size_t frame_index() const { return frame_; }
    std::span<const Entry> entries() const { return entries_; }
    const Entry& entry(TaskId task) const;
    double debt(TaskId task) const { return entry(task).debt; }
    double positive_debt(TaskId task) const;

private:
    std::vector<Entry> entries_;
    double frame_length_;
    std::size_t frame_{1};
};

/// Largest Debt First priority: debt descending, ties by ascending id.
std::vector<TaskId> ldf_order(const DebtLedger& ledger);

enum class JobStatus { Absent, Pending, Completed, Expired };

struct TaskState {
    TaskId task{};
    JobStatus status{JobStatus::Absent};
    double received{0.0};  // service so far in this frame
};

struct FrameView {
    std::size_t frame{1};
    double now{0.0};  // time since frame start
    double frame_length{1.0};
    std::span<const TaskState> tasks;  // aligned with the spec's task order
    const DebtLedger* ledger{nullptr};

    const TaskState& state(TaskId id) const;
    bool pending(TaskId id) const { return state(id).status == JobStatus::Pending; }
};

struct ScheduleDecision {
    std::vector<TaskId> active;  // sorted; resource sets pairwise disjoint
};

/// Largest Total Debt First on the two-resource topology. Candidates are
/// {1,2}, {1}, {2} and each shared {n} with pending jobs; the chosen set
/// maximises the sum of positive debts, then cardinality, then is the
/// lexicographically smallest.
ScheduleDecision ltdf_select(const DebtLedger& ledger, std::span<const TaskState> tasks,
                             const TwoResourceRoles& roles);

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// Called once at each frame start, before the first select().
    virtual void begin_frame(const FrameView& view, CounterRng& rng);
    /// Called at frame start and after every completion.
    virtual ScheduleDecision select(const FrameView& view) = 0;
};

struct PolicyConfig {
    std::string name{"ldf"};  // ldf | ltdf | static | random | share
    std::map<std::string, std::string> args;
};

/// Builds a policy. Recognised args: static `order=3,1,2`;
/// share `weights=1:0.5,2:0.25` (defaults to implied workloads).
/// Throws BadConfig for unknown names or args, UnsupportedTopology when
/// the policy cannot run on the spec.
std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const SystemSpec& spec);

enum class BaselineKind { StaticPriority, RandomOrder, ProportionalShare };
std::unique_ptr<Policy> baseline_policy(BaselineKind kind, const SystemSpec& spec);

}  // namespace rtspn
