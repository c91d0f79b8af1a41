#include "rtspn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace rtspn {

const TaskSpec* SystemSpec::find_task(TaskId id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

const TaskSpec& SystemSpec::task(TaskId id) const {
    const auto* t = find_task(id);
    if (t == nullptr) throw Error(Errc::UnknownTask, fmt::format("task {}", id));
    return *t;
}

std::vector<TaskId> SystemSpec::task_ids() const {
    std::vector<TaskId> ids;
    ids.reserve(tasks.size());
    for (const auto& t : tasks) ids.push_back(t.id);
    return ids;
}

bool contains(const TaskSet& set, TaskId id) {
    return std::binary_search(set.begin(), set.end(), id);
}

TaskSet intersect(const TaskSet& a, const TaskSet& b) {
    TaskSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::string format_subset(const TaskSet& set, char separator) {
    std::string out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i != 0) out += separator;
        out += std::to_string(set[i]);
    }
    return out;
}

std::vector<TaskSet> enumerate_subsets(std::span<const TaskId> tasks, bool include_empty) {
    TaskSet sorted(tasks.begin(), tasks.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<TaskSet> out;
    out.reserve((std::size_t{1} << n) - (include_empty ? 0 : 1));
    if (include_empty) out.emplace_back();
    // Combinations of each size in lexicographic order.
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            TaskSet s;
            s.reserve(k);
            for (auto i : idx) s.push_back(sorted[i]);
            out.push_back(std::move(s));
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

std::vector<double> stationary_distribution(const MarkovArrivals& chain) {
    const std::size_t n = chain.transition.size();
    if (n == 0) return {};
    // Lazy chain (I + P) / 2 has the same stationary law and is aperiodic.
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (int iter = 0; iter < 100000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            next[i] += 0.5 * pi[i];
            for (std::size_t j = 0; j < n; ++j) next[j] += 0.5 * pi[i] * chain.transition[i][j];
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - pi[i]));
        pi.swap(next);
        if (diff < 1e-15) break;
    }
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (auto& p : pi) p /= total;
    return pi;
}

namespace {

TaskSet sorted_tasks(std::span<const TaskId> tasks) {
    TaskSet out(tasks.begin(), tasks.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct DistributionBuilder {
    const TaskSet& tasks;

    SubsetDistributionMap operator()(const EveryFrame&) const { return {{tasks, 1.0}}; }

    SubsetDistributionMap operator()(const IndependentBernoulli& model) const {
        std::vector<double> p;
        p.reserve(tasks.size());
        for (auto id : tasks) {
            auto it = model.probability.find(id);
            if (it == model.probability.end())
                throw Error(Errc::UnknownTask, fmt::format("no arrival probability for task {}", id));
            p.push_back(it->second);
        }
        SubsetDistributionMap out;
        const std::size_t n = tasks.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            double prob = 1.0;
            TaskSet s;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::size_t{1} << i)) {
                    prob *= p[i];
                    s.push_back(tasks[i]);
                } else {
                    prob *= 1.0 - p[i];
                }
            }
            if (prob > 0.0) out[s] += prob;
        }
        return out;
    }

    SubsetDistributionMap operator()(const SubsetDistribution& model) const {
        SubsetDistributionMap out;
        for (const auto& [subset, prob] : model.entries) {
            if (prob > 0.0) out[intersect(subset, tasks)] += prob;
        }
        return out;
    }

    SubsetDistributionMap operator()(const MarkovArrivals& model) const {
        const auto pi = stationary_distribution(model);
        SubsetDistributionMap out;
        for (std::size_t s = 0; s < pi.size(); ++s) {
            if (pi[s] > 0.0) out[intersect(model.state_arrivals[s], tasks)] += pi[s];
        }
        return out;
    }
};

}  // namespace

SubsetDistributionMap arrival_subset_distribution(const ArrivalModel& model,
                                                  std::span<const TaskId> tasks) {
    const TaskSet sorted = sorted_tasks(tasks);
    return std::visit(DistributionBuilder{sorted}, model);
}

double mean_arrival_rate(const ArrivalModel& model, std::span<const TaskId> tasks, TaskId task) {
    if (std::find(tasks.begin(), tasks.end(), task) == tasks.end())
        throw Error(Errc::UnknownTask, fmt::format("task {}", task));
    double rate = 0.0;
    for (const auto& [subset, prob] : arrival_subset_distribution(model, tasks)) {
        if (contains(subset, task)) rate += prob;
    }
    return rate;
}

double mean_arrival_rate(const SystemSpec& spec, TaskId task) {
    const auto ids = spec.task_ids();
    return mean_arrival_rate(spec.arrivals, ids, task);
}

namespace {

void check_arrivals(const ArrivalModel& model, const TaskSet& ids, std::vector<Issue>& issues) {
    auto known = [&](TaskId id) { return contains(ids, id); };
    auto bad = [&](std::string detail) { issues.push_back({Errc::BadDistribution, std::move(detail)}); };

    if (const auto* bern = std::get_if<IndependentBernoulli>(&model)) {
        for (auto id : ids) {
            if (!bern->probability.contains(id)) bad(fmt::format("task {} has no arrival probability", id));
        }
        for (const auto& [id, p] : bern->probability) {
            if (!known(id)) bad(fmt::format("probability given for unknown task {}", id));
            if (!(p >= 0.0 && p <= 1.0)) bad(fmt::format("task {} probability {} outside [0,1]", id, p));
        }
    } else if (const auto* dist = std::get_if<SubsetDistribution>(&model)) {
        double total = 0.0;
        std::set<TaskSet> seen;
        for (const auto& [subset, prob] : dist->entries) {
            const std::string name = "{" + format_subset(subset, ',') + "}";
            if (!(prob >= 0.0)) bad(fmt::format("subset {} has negative probability {}", name, prob));
            if (!seen.insert(subset).second) bad(fmt::format("subset {} listed twice", name));
            for (auto id : subset) {
                if (!known(id)) bad(fmt::format("subset {} names unknown task {}", name, id));
            }
            total += prob;
        }
        if (std::abs(total - 1.0) > kDistributionTolerance)
            bad(fmt::format("subset probabilities sum to {:.17g}", total));
    } else if (const auto* chain = std::get_if<MarkovArrivals>(&model)) {
        const std::size_t n = chain->state_arrivals.size();
        if (n == 0) bad("markov chain has no states");
        if (chain->transition.size() != n) bad("transition matrix row count differs from state count");
        for (std::size_t i = 0; i < chain->transition.size(); ++i) {
            const auto& row = chain->transition[i];
            if (row.size() != n) {
                bad(fmt::format("transition row {} has {} entries", i, row.size()));
                continue;
            }
            double total = 0.0;
            for (double p : row) {
                if (!(p >= 0.0)) bad(fmt::format("transition row {} has negative entry", i));
                total += p;
            }
            if (std::abs(total - 1.0) > kDistributionTolerance)
                bad(fmt::format("transition row {} sums to {:.17g}", i, total));
        }
        for (std::size_t s = 0; s < n; ++s) {
            for (auto id : chain->state_arrivals[s]) {
                if (!known(id)) bad(fmt::format("state {} names unknown task {}", s, id));
            }
        }
    }
}

void canonicalize(ArrivalModel& model) {
    auto canon = [](TaskSet& s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    };
    if (auto* dist = std::get_if<SubsetDistribution>(&model)) {
        for (auto& [subset, prob] : dist->entries) canon(subset);
        std::stable_sort(dist->entries.begin(), dist->entries.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    } else if (auto* chain = std::get_if<MarkovArrivals>(&model)) {
        for (auto& s : chain->state_arrivals) canon(s);
    }
}

}  // namespace

SystemSpec validate_spec(SystemSpec raw) {
    std::vector<Issue> issues;
    std::sort(raw.tasks.begin(), raw.tasks.end(),
              [](const TaskSpec& a, const TaskSpec& b) { return a.id < b.id; });
    canonicalize(raw.arrivals);

    if (!(raw.frame_length > 0.0) || !std::isfinite(raw.frame_length))
        issues.push_back({Errc::NonPositiveFrameLength, fmt::format("frame_length {}", raw.frame_length)});
    if (raw.tasks.empty()) issues.push_back({Errc::EmptyTaskList, "no tasks"});

    for (std::size_t i = 1; i < raw.tasks.size(); ++i) {
        if (raw.tasks[i].id == raw.tasks[i - 1].id)
            issues.push_back({Errc::DuplicateTaskId, fmt::format("task {}", raw.tasks[i].id)});
    }
    for (const auto& t : raw.tasks) {
        if (!(t.rate > 0.0) || !std::isfinite(t.rate))
            issues.push_back({Errc::NonPositiveRate, fmt::format("task {}", t.id)});
        if (!(t.requirement >= 0.0))
            issues.push_back({Errc::NegativeRequirement, fmt::format("task {}", t.id)});
        if (t.resources.empty())
            issues.push_back({Errc::EmptyResourceSet, fmt::format("task {}", t.id)});
        for (const auto& r : t.resources) {
            if (!raw.resources.contains(r))
                issues.push_back({Errc::UnknownResource, fmt::format("task {} uses '{}'", t.id, r)});
        }
    }

    const auto before = issues.size();
    const TaskSet ids = sorted_tasks(raw.task_ids());
    check_arrivals(raw.arrivals, ids, issues);

    // r_n is only meaningful once the arrival law itself is sound.
    if (issues.size() == before && !ids.empty()) {
        const auto dist = arrival_subset_distribution(raw.arrivals, ids);
        for (const auto& t : raw.tasks) {
            double r = 0.0;
            for (const auto& [subset, prob] : dist) {
                if (contains(subset, t.id)) r += prob;
            }
            if (t.requirement > r + kDistributionTolerance)
                issues.push_back({Errc::RequirementExceedsArrivalRate,
                                  fmt::format("task {} requires {} but arrives {} per frame", t.id,
                                              t.requirement, r)});
        }
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return raw;
}

}  // namespace rtspn
