#pragma once

// Frame-based discrete-event engine. At each frame start the arrival set and
// one hidden processing time per arriving job are drawn; the policy is asked
// for an active set at frame start and after every completion; jobs still
// unfinished at the frame boundary expire.
//
// Random streams: frame k draws from CounterRng(split(split(seed, 0), k));
// the policy stream is CounterRng(split(seed, 1)); Markov traffic draws its
// initial state from CounterRng(split(seed, 2)).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rtspn/model.hpp"
#include "rtspn/policy.hpp"
#include "rtspn/reduction.hpp"
#include "rtspn/stats.hpp"

namespace rtspn {

struct JobRecord {
    TaskId task{};
    double required{0.0};  // hidden processing time
    double received{0.0};
    bool completed{false};
    double completion_time{0.0};
};

struct Segment {
    double start{0.0};
    double end{0.0};
    double duration{0.0};  // the exact increment credited to each active job
    std::vector<TaskId> active;
};

/// Everything that happened in one frame, including the hidden draws.
/// Observers are for analysis and tests; policies never see this.
struct FrameRecord {
    std::size_t frame{0};  // 0-based
    std::vector<JobRecord> jobs;
    std::vector<Segment> segments;
    double idle{0.0};
};

using FrameObserver = std::function<void(const FrameRecord&)>;

struct RunOptions {
    bool strict{true};  // NonWorkConserving is an error rather than a counter
    std::size_t batches{100};
    FrameObserver observer;
};

struct TaskMetrics {
    TaskId task{};
    double required{0.0};  // q_n
    std::uint64_t arrivals{0};
    std::uint64_t completions{0};
    double service{0.0};
    BatchSeries completion_series;  // e_n(k)
    BatchSeries service_series;     // gamma_n(k)

    double throughput() const { return completion_series.mean(); }
    double throughput_stderr() const { return completion_series.standard_error(); }
    double service_rate() const { return service_series.mean(); }
    /// Met when the empirical throughput is within 3 standard errors of q_n.
    bool met() const { return throughput() >= required - 3.0 * throughput_stderr(); }
};

struct RunMetrics {
    std::size_t frames{0};
    std::uint64_t seed{0};
    std::string policy;
    std::string config_digest;
    std::vector<TaskMetrics> tasks;  // spec task order
    double idle_time{0.0};
    BatchSeries idle_series;
    double max_conservation_error{0.0};  // single resource: |sum gamma + idle - T|
    std::uint64_t work_conservation_violations{0};

    const TaskMetrics& task(TaskId id) const;
    bool all_met() const;
};

RunMetrics run(const SystemSpec& spec, Policy& policy, std::size_t frames, std::uint64_t seed,
               const RunOptions& options = {});
RunMetrics run(const SystemSpec& spec, const PolicyConfig& policy, std::size_t frames, std::uint64_t seed,
               const RunOptions& options = {});

struct TaskAggregate {
    TaskId task{};
    double required{0.0};
    std::uint64_t arrivals{0};
    std::uint64_t completions{0};
    double service{0.0};
    double throughput{0.0};         // mean over replications
    double throughput_stderr{0.0};  // across replications; the run's own for R = 1
    double ci_half_width{0.0};      // 1.96 * stderr
    bool met{false};
};

struct Replication {
    std::vector<RunMetrics> runs;
    std::vector<TaskAggregate> tasks;
    double idle_mean{0.0};
    std::string config_digest;
};

/// Replication i uses seed split(base_seed, i). With jobs > 1 runs execute
/// concurrently; the aggregate is folded in replication order.
Replication replicate(const SystemSpec& spec, const PolicyConfig& policy, std::size_t frames,
                      std::uint64_t base_seed, std::size_t replications, std::size_t jobs = 1,
                      const RunOptions& options = {});

struct CoupledMetrics {
    RunMetrics direct;   // two-resource run under LTDF
    RunMetrics reduced;  // induced trajectory of the reduced system
    std::uint64_t correspondence_violations{0};
    std::uint64_t completion_mismatches{0};  // c* completion vs first pair completion
};

/// Runs LTDF on the two-resource system and replays each frame on the
/// reduced system from the same draws: t_c* = min(t1, t2), the residual
/// |t1 - t2| is the 1*/2* job, shared tasks keep their draws.
CoupledMetrics coupled_run(const SystemSpec& two_resource, const ReducedSystem& reduced, std::size_t frames,
                           std::uint64_t seed, const RunOptions& options = {});

std::string config_digest(const SystemSpec& spec, const PolicyConfig& policy, std::size_t frames,
                          std::uint64_t seed);

}  // namespace rtspn
