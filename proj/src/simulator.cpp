#include "rtspn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include <fmt/format.h>

#include "rtspn/spec_io.hpp"

namespace rtspn {

namespace {

constexpr std::uint64_t kArrivalStream = 0;
constexpr std::uint64_t kPolicyStream = 1;
constexpr std::uint64_t kTrafficInitStream = 2;

// Draws the arrival set of each frame; owns the Markov traffic state.
class ArrivalSampler {
public:
    ArrivalSampler(const SystemSpec& spec, std::uint64_t seed) : spec_(spec) {
        if (const auto* bern = std::get_if<IndependentBernoulli>(&spec.arrivals)) {
            for (const auto& t : spec.tasks) probability_.push_back(bern->probability.at(t.id));
        } else if (const auto* dist = std::get_if<SubsetDistribution>(&spec.arrivals)) {
            double acc = 0.0;
            for (const auto& [subset, prob] : dist->entries) {
                acc += prob;
                cumulative_.push_back(acc);
                subsets_.push_back(subset);
            }
        } else if (const auto* chain = std::get_if<MarkovArrivals>(&spec.arrivals)) {
            chain_ = chain;
            const auto pi = stationary_distribution(*chain);
            CounterRng init(split_seed(seed, kTrafficInitStream));
            state_ = pick(pi, init.uniform());
        }
    }

    std::vector<bool> draw(std::size_t frame, CounterRng& rng) {
        const std::size_t n = spec_.tasks.size();
        std::vector<bool> arrived(n, false);
        auto mark = [&](const TaskSet& set) {
            for (std::size_t i = 0; i < n; ++i) arrived[i] = contains(set, spec_.tasks[i].id);
        };
        if (std::holds_alternative<EveryFrame>(spec_.arrivals)) {
            arrived.assign(n, true);
        } else if (!probability_.empty()) {
            for (std::size_t i = 0; i < n; ++i) arrived[i] = rng.uniform() < probability_[i];
        } else if (!subsets_.empty()) {
            const double u = rng.uniform() * cumulative_.back();
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                   subsets_.size() - 1);
            mark(subsets_[idx]);
        } else if (chain_ != nullptr) {
            if (frame > 0) state_ = pick(chain_->transition[state_], rng.uniform());
            mark(chain_->state_arrivals[state_]);
        }
        return arrived;
    }

private:
    static std::size_t pick(const std::vector<double>& weights, double u) {
        double total = 0.0;
        for (double w : weights) total += w;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u * total < acc) return i;
        }
        return weights.size() - 1;
    }

    const SystemSpec& spec_;
    std::vector<double> probability_;
    std::vector<double> cumulative_;
    std::vector<TaskSet> subsets_;
    const MarkovArrivals* chain_{nullptr};
    std::size_t state_{0};
};

void check_decision(const ScheduleDecision& d, const std::vector<TaskState>& states, const SystemSpec& spec) {
    std::set<ResourceId> used;
    for (std::size_t i = 0; i < d.active.size(); ++i) {
        const TaskId id = d.active[i];
        if (i > 0 && d.active[i - 1] >= id)
            throw Error(Errc::InvalidDecision, "active set must be sorted and duplicate-free");
        auto it = std::find_if(states.begin(), states.end(), [&](const TaskState& s) { return s.task == id; });
        if (it == states.end() || it->status != JobStatus::Pending)
            throw Error(Errc::InvalidDecision, fmt::format("task {} has no pending job", id));
        for (const auto& r : spec.task(id).resources) {
            if (!used.insert(r).second)
                throw Error(Errc::PolicyConflict, fmt::format("resource '{}' assigned twice", r));
        }
    }
}

}  // namespace

const TaskMetrics& RunMetrics::task(TaskId id) const {
    for (const auto& t : tasks) {
        if (t.task == id) return t;
    }
    throw Error(Errc::UnknownTask, fmt::format("task {}", id));
}

bool RunMetrics::all_met() const {
    return std::all_of(tasks.begin(), tasks.end(), [](const TaskMetrics& t) { return t.met(); });
}

std::string config_digest(const SystemSpec& spec, const PolicyConfig& policy, std::size_t frames,
                          std::uint64_t seed) {
    std::string text = spec_to_json(spec).dump();
    text += "|policy=" + policy.name;
    for (const auto& [k, v] : policy.args) text += "," + k + "=" + v;
    text += fmt::format("|frames={}|seed={}", frames, seed);
    return digest_hex(text);
}

RunMetrics run(const SystemSpec& spec, Policy& policy, std::size_t frames, std::uint64_t seed,
               const RunOptions& options) {
    if (frames == 0) throw Error(Errc::BadConfig, "frames must be at least 1");
    const std::size_t n = spec.tasks.size();
    const double T = spec.frame_length;

    RunMetrics m;
    m.frames = frames;
    m.seed = seed;
    m.policy = policy.name();
    m.idle_series = BatchSeries(frames, options.batches);
    for (const auto& t : spec.tasks) {
        TaskMetrics tm;
        tm.task = t.id;
        tm.required = t.requirement;
        tm.completion_series = BatchSeries(frames, options.batches);
        tm.service_series = BatchSeries(frames, options.batches);
        m.tasks.push_back(std::move(tm));
    }

    DebtLedger ledger = DebtLedger::for_spec(spec);
    ArrivalSampler sampler(spec, seed);
    CounterRng policy_rng(split_seed(seed, kPolicyStream));
    const std::uint64_t arrival_root = split_seed(seed, kArrivalStream);

    std::vector<TaskState> states(n);
    std::vector<double> required(n), service(n);
    FrameRecord record;

    for (std::size_t k = 0; k < frames; ++k) {
        CounterRng rng(split_seed(arrival_root, k));
        const auto arrived = sampler.draw(k, rng);
        for (std::size_t i = 0; i < n; ++i) {
            states[i] = {spec.tasks[i].id, arrived[i] ? JobStatus::Pending : JobStatus::Absent, 0.0};
            required[i] = arrived[i] ? rng.exponential(spec.tasks[i].rate) : 0.0;
            service[i] = 0.0;
        }
        record.frame = k;
        record.segments.clear();
        std::vector<double> completion_time(n, 0.0);

        FrameView view{k + 1, 0.0, T, states, &ledger};
        policy.begin_frame(view, policy_rng);

        double now = 0.0;
        double idle = 0.0;
        while (now < T) {
            view.now = now;
            const auto decision = policy.select(view);
            check_decision(decision, states, spec);
            if (decision.active.empty()) {
                const bool waiting = std::any_of(states.begin(), states.end(),
                                                 [](const TaskState& s) { return s.status == JobStatus::Pending; });
                if (waiting) {
                    if (options.strict)
                        throw Error(Errc::NonWorkConserving,
                                    fmt::format("policy '{}' idled in frame {} with pending jobs", policy.name(), k + 1));
                    ++m.work_conservation_violations;
                }
                idle += T - now;
                now = T;
                break;
            }

            std::vector<std::size_t> idx;
            double shortest = std::numeric_limits<double>::infinity();
            for (auto id : decision.active) {
                const auto i = static_cast<std::size_t>(
                    std::find_if(states.begin(), states.end(), [&](const TaskState& s) { return s.task == id; }) -
                    states.begin());
                idx.push_back(i);
                shortest = std::min(shortest, required[i] - states[i].received);
            }
            const bool to_end = shortest >= T - now;
            const double step = to_end ? T - now : shortest;
            for (auto i : idx) {
                const double remaining = required[i] - states[i].received;
                service[i] += step;
                if (remaining <= step) {
                    states[i].received = required[i];
                    states[i].status = JobStatus::Completed;
                    completion_time[i] = now + step;
                } else {
                    states[i].received += step;
                }
            }
            if (options.observer) record.segments.push_back({now, to_end ? T : now + step, step, decision.active});
            now = to_end ? T : now + step;
        }

        double total_service = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (states[i].status == JobStatus::Pending) states[i].status = JobStatus::Expired;
            service[i] = std::min(service[i], T);
            total_service += service[i];
            auto& tm = m.tasks[i];
            const bool done = states[i].status == JobStatus::Completed;
            tm.arrivals += arrived[i] ? 1 : 0;
            tm.completions += done ? 1 : 0;
            tm.service += service[i];
            tm.completion_series.add(k, done ? 1.0 : 0.0);
            tm.service_series.add(k, service[i]);
        }
        m.idle_time += idle;
        m.idle_series.add(k, idle);
        if (spec.single_resource())
            m.max_conservation_error = std::max(m.max_conservation_error, std::abs(total_service + idle - T));

        if (options.observer) {
            record.jobs.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (!arrived[i]) continue;
                record.jobs.push_back({states[i].task, required[i], states[i].received,
                                       states[i].status == JobStatus::Completed, completion_time[i]});
            }
            record.idle = idle;
            options.observer(record);
        }
        ledger.update(service);
    }
    return m;
}

RunMetrics run(const SystemSpec& spec, const PolicyConfig& config, std::size_t frames, std::uint64_t seed,
               const RunOptions& options) {
    auto policy = make_policy(config, spec);
    auto m = run(spec, *policy, frames, seed, options);
    m.config_digest = config_digest(spec, config, frames, seed);
    return m;
}

Replication replicate(const SystemSpec& spec, const PolicyConfig& policy, std::size_t frames,
                      std::uint64_t base_seed, std::size_t replications, std::size_t jobs,
                      const RunOptions& options) {
    if (replications == 0) throw Error(Errc::BadConfig, "replications must be at least 1");
    Replication out;
    out.runs.resize(replications);
    jobs = std::max<std::size_t>(1, jobs);

    for (std::size_t start = 0; start < replications; start += jobs) {
        const std::size_t stop = std::min(replications, start + jobs);
        std::vector<std::future<RunMetrics>> pending;
        for (std::size_t i = start; i < stop; ++i) {
            auto task = [&, i] {
                try {
                    return run(spec, policy, frames, split_seed(base_seed, i), options);
                } catch (const Error& e) {
                    throw Error(e.code(), fmt::format("replication {}: {}", i, e.what()));
                }
            };
            pending.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, task));
        }
        for (std::size_t i = start; i < stop; ++i) out.runs[i] = pending[i - start].get();
    }

    const double r = static_cast<double>(replications);
    for (std::size_t t = 0; t < spec.tasks.size(); ++t) {
        TaskAggregate agg;
        agg.task = spec.tasks[t].id;
        agg.required = spec.tasks[t].requirement;
        RunningStats q;
        for (const auto& run : out.runs) {
            const auto& tm = run.tasks[t];
            agg.arrivals += tm.arrivals;
            agg.completions += tm.completions;
            agg.service += tm.service;
            q.add(tm.throughput());
        }
        agg.throughput = q.mean();
        agg.throughput_stderr = replications == 1 ? out.runs.front().tasks[t].throughput_stderr() : q.standard_error();
        agg.ci_half_width = 1.96 * agg.throughput_stderr;
        agg.met = agg.throughput >= agg.required - 3.0 * agg.throughput_stderr;
        out.tasks.push_back(agg);
    }
    for (const auto& run : out.runs) out.idle_mean += run.idle_series.mean() / r;
    out.config_digest = digest_hex(config_digest(spec, policy, frames, base_seed) + fmt::format("|R={}", replications));
    return out;
}

CoupledMetrics coupled_run(const SystemSpec& two_resource, const ReducedSystem& reduced, std::size_t frames,
                           std::uint64_t seed, const RunOptions& options) {
    const auto& roles = reduced.roles;
    const double T = two_resource.frame_length;
    const double tol = 1e-9 * T;

    CoupledMetrics out;
    auto& rm = out.reduced;
    rm.frames = frames;
    rm.seed = seed;
    rm.policy = "ltdf-induced";
    rm.idle_series = BatchSeries(frames, options.batches);
    for (const auto& t : reduced.spec.tasks) {
        TaskMetrics tm;
        tm.task = t.id;
        tm.required = t.requirement;
        tm.completion_series = BatchSeries(frames, options.batches);
        tm.service_series = BatchSeries(frames, options.batches);
        rm.tasks.push_back(std::move(tm));
    }
    std::map<TaskId, std::size_t> slot;
    for (std::size_t i = 0; i < rm.tasks.size(); ++i) slot[rm.tasks[i].task] = i;

    struct ReducedJob {
        double required{0.0};
        double received{0.0};
        bool completed{false};
    };

    auto replay = [&](const FrameRecord& rec) {
        auto job_of = [&](TaskId id) -> const JobRecord& {
            for (const auto& j : rec.jobs) {
                if (j.task == id) return j;
            }
            throw Error(Errc::InvalidCorrespondence, fmt::format("frame {} has no job of task {}", rec.frame, id));
        };
        const auto& j1 = job_of(roles.first);
        const auto& j2 = job_of(roles.second);

        std::map<TaskId, ReducedJob> jobs;
        jobs[reduced.combined] = {std::min(j1.required, j2.required)};
        const TaskId residual = j1.required >= j2.required ? reduced.first_star : reduced.second_star;
        jobs[residual] = {std::abs(j1.required - j2.required)};
        for (auto id : roles.shared) jobs[id] = {job_of(id).required};

        std::set<TaskId> completed;
        auto credit = [&](TaskId rid, double amount) {
            auto& job = jobs.at(rid);
            auto& tm = rm.tasks[slot.at(rid)];
            const double remaining = job.required - job.received;
            job.received += amount;
            tm.service += amount;
            if (!job.completed && remaining <= amount + tol) {
                job.completed = true;
                job.received = job.required;
            }
        };
        std::vector<double> frame_service(rm.tasks.size(), 0.0);
        for (const auto& seg : rec.segments) {
            completed.clear();
            for (const auto& j : rec.jobs) {
                if (j.completed && j.completion_time <= seg.start) completed.insert(j.task);
            }
            const bool has1 = std::binary_search(seg.active.begin(), seg.active.end(), roles.first);
            const bool has2 = std::binary_search(seg.active.begin(), seg.active.end(), roles.second);
            TaskId choice{};
            if (has1 && has2) {
                choice = reduced.combined;
            } else if (has1) {
                choice = reduced.first_star;
            } else if (has2) {
                choice = reduced.second_star;
            } else if (seg.active.size() == 1) {
                choice = seg.active.front();
            } else {
                ++out.correspondence_violations;
                continue;
            }
            try {
                decision_correspondence(reduced, choice, completed);
            } catch (const Error& e) {
                if (e.code() != Errc::InvalidCorrespondence) throw;
                ++out.correspondence_violations;
                continue;
            }
            credit(choice, seg.duration);
            frame_service[slot.at(choice)] += seg.duration;
            // A tie t1 == t2 leaves a zero residual that finishes with c*.
            if (choice == reduced.combined && jobs.at(reduced.combined).completed && jobs.at(residual).required == 0.0)
                jobs.at(residual).completed = true;
        }

        const bool pair_first_done = j1.completed || j2.completed;
        bool mismatch = jobs.at(reduced.combined).completed != pair_first_done;
        const auto& residual_original = residual == reduced.first_star ? j1 : j2;
        mismatch = mismatch || jobs.at(residual).completed != residual_original.completed;
        for (auto id : roles.shared) mismatch = mismatch || jobs.at(id).completed != job_of(id).completed;
        if (mismatch) ++out.completion_mismatches;

        for (auto& tm : rm.tasks) {
            const auto it = jobs.find(tm.task);
            const bool done = it != jobs.end() && it->second.completed;
            if (it != jobs.end()) ++tm.arrivals;
            tm.completions += done ? 1 : 0;
            tm.completion_series.add(rec.frame, done ? 1.0 : 0.0);
        }
        for (std::size_t i = 0; i < rm.tasks.size(); ++i) rm.tasks[i].service_series.add(rec.frame, frame_service[i]);
        rm.idle_time += rec.idle;
        rm.idle_series.add(rec.frame, rec.idle);
    };

    RunOptions direct_options = options;
    direct_options.observer = [&](const FrameRecord& rec) {
        replay(rec);
        if (options.observer) options.observer(rec);
    };
    const PolicyConfig ltdf{"ltdf", {}};
    out.direct = run(two_resource, ltdf, frames, seed, direct_options);
    rm.config_digest = out.direct.config_digest;
    return out;
}

}  // namespace rtspn
