#include "rtspn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "rtspn/feasibility.hpp"

namespace rtspn {

DebtLedger::DebtLedger(std::vector<std::pair<TaskId, double>> workloads, double frame_length)
    : frame_length_(frame_length) {
    std::sort(workloads.begin(), workloads.end());
    for (const auto& [id, w] : workloads) entries_.push_back({id, w, 0.0, 0.0});
}

DebtLedger DebtLedger::for_spec(const SystemSpec& spec) {
    std::vector<std::pair<TaskId, double>> w;
    for (const auto& t : spec.tasks) w.emplace_back(t.id, implied_workload(t.requirement, t.rate));
    return DebtLedger(std::move(w), spec.frame_length);
}

void DebtLedger::update(std::span<const double> frame_service) {
    if (frame_service.size() != entries_.size())
        throw Error(Errc::BadConfig, fmt::format("service vector has {} entries, ledger has {}",
                                                 frame_service.size(), entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const double g = frame_service[i];
        if (g < 0.0 || g > frame_length_)
            throw Error(Errc::ServiceExceedsFrame,
                        fmt::format("task {} served {} in a frame of {}", entries_[i].task, g, frame_length_));
    }
    ++frame_;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& e = entries_[i];
        e.cumulative_service += frame_service[i];
        e.debt = static_cast<double>(frame_ - 1) * e.workload - e.cumulative_service;
    }
}

const DebtLedger::Entry& DebtLedger::entry(TaskId task) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), task,
                               [](const Entry& e, TaskId id) { return e.task < id; });
    if (it == entries_.end() || it->task != task) throw Error(Errc::UnknownTask, fmt::format("task {}", task));
    return *it;
}

double DebtLedger::positive_debt(TaskId task) const { return std::max(debt(task), 0.0); }

std::vector<TaskId> ldf_order(const DebtLedger& ledger) {
    std::vector<DebtLedger::Entry> entries(ledger.entries().begin(), ledger.entries().end());
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.debt != b.debt) return a.debt > b.debt;
        return a.task < b.task;
    });
    std::vector<TaskId> order;
    order.reserve(entries.size());
    for (const auto& e : entries) order.push_back(e.task);
    return order;
}

const TaskState& FrameView::state(TaskId id) const {
    for (const auto& s : tasks) {
        if (s.task == id) return s;
    }
    throw Error(Errc::UnknownTask, fmt::format("task {}", id));
}

ScheduleDecision ltdf_select(const DebtLedger& ledger, std::span<const TaskState> tasks,
                             const TwoResourceRoles& roles) {
    auto pending = [&](TaskId id) {
        for (const auto& s : tasks) {
            if (s.task == id) return s.status == JobStatus::Pending;
        }
        return false;
    };

    std::vector<std::vector<TaskId>> candidates;
    if (pending(roles.first) && pending(roles.second))
        candidates.push_back({std::min(roles.first, roles.second), std::max(roles.first, roles.second)});
    if (pending(roles.first)) candidates.push_back({roles.first});
    if (pending(roles.second)) candidates.push_back({roles.second});
    for (auto id : roles.shared) {
        if (pending(id)) candidates.push_back({id});
    }
    if (candidates.empty()) return {};

    auto score = [&](const std::vector<TaskId>& set) {
        double total = 0.0;
        for (auto id : set) total += ledger.positive_debt(id);
        return total;
    };
    const auto* best = &candidates.front();
    double best_score = score(*best);
    for (const auto& c : candidates) {
        const double s = score(c);
        const bool better = s > best_score ||
                            (s == best_score && (c.size() > best->size() || (c.size() == best->size() && c < *best)));
        if (better) {
            best = &c;
            best_score = s;
        }
    }
    return {*best};
}

void Policy::begin_frame(const FrameView&, CounterRng&) {}

namespace {

class GreedyPolicy : public Policy {
public:
    explicit GreedyPolicy(const SystemSpec& spec) {
        for (const auto& t : spec.tasks) resources_[t.id] = t.resources;
    }

protected:
    // First-fit over a priority order: take each pending job whose resources
    // are still free.
    ScheduleDecision fill(const std::vector<TaskId>& order, const FrameView& view) const {
        ScheduleDecision d;
        std::set<ResourceId> used;
        for (auto id : order) {
            if (!view.pending(id)) continue;
            const auto& need = resources_.at(id);
            const bool free = std::none_of(need.begin(), need.end(), [&](const auto& r) { return used.contains(r); });
            if (!free) continue;
            used.insert(need.begin(), need.end());
            d.active.push_back(id);
        }
        std::sort(d.active.begin(), d.active.end());
        return d;
    }

    std::map<TaskId, std::set<ResourceId>> resources_;
};

class LargestDebtFirst final : public GreedyPolicy {
public:
    using GreedyPolicy::GreedyPolicy;
    std::string name() const override { return "ldf"; }
    void begin_frame(const FrameView& view, CounterRng&) override { order_ = ldf_order(*view.ledger); }
    ScheduleDecision select(const FrameView& view) override { return fill(order_, view); }

private:
    std::vector<TaskId> order_;
};

class LargestTotalDebtFirst final : public Policy {
public:
    explicit LargestTotalDebtFirst(const SystemSpec& spec) : roles_(two_resource_roles(spec)) {}
    std::string name() const override { return "ltdf"; }
    ScheduleDecision select(const FrameView& view) override { return ltdf_select(*view.ledger, view.tasks, roles_); }

private:
    TwoResourceRoles roles_;
};

class StaticPriority final : public GreedyPolicy {
public:
    StaticPriority(const SystemSpec& spec, std::vector<TaskId> order) : GreedyPolicy(spec), order_(std::move(order)) {}
    std::string name() const override { return "static"; }
    ScheduleDecision select(const FrameView& view) override { return fill(order_, view); }

private:
    std::vector<TaskId> order_;
};

class RandomOrder final : public GreedyPolicy {
public:
    explicit RandomOrder(const SystemSpec& spec) : GreedyPolicy(spec), order_(spec.task_ids()) {}
    std::string name() const override { return "random"; }
    void begin_frame(const FrameView&, CounterRng& rng) override {
        std::sort(order_.begin(), order_.end());
        for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
    }
    ScheduleDecision select(const FrameView& view) override { return fill(order_, view); }

private:
    std::vector<TaskId> order_;
};

// Lottery scheduling: at every decision point the priority order is drawn
// by weighted sampling without replacement among pending jobs.
class ProportionalShare final : public GreedyPolicy {
public:
    ProportionalShare(const SystemSpec& spec, std::map<TaskId, double> weights)
        : GreedyPolicy(spec), weights_(std::move(weights)) {}
    std::string name() const override { return "share"; }
    void begin_frame(const FrameView&, CounterRng& rng) override { rng_ = &rng; }
    ScheduleDecision select(const FrameView& view) override {
        std::vector<TaskId> pool;
        for (const auto& s : view.tasks) {
            if (s.status == JobStatus::Pending) pool.push_back(s.task);
        }
        std::vector<TaskId> order;
        while (!pool.empty()) {
            double total = 0.0;
            for (auto id : pool) total += weights_.at(id);
            std::size_t pick = 0;
            if (total > 0.0) {
                double u = rng_->uniform() * total;
                for (pick = 0; pick + 1 < pool.size(); ++pick) {
                    u -= weights_.at(pool[pick]);
                    if (u < 0.0) break;
                }
            }
            order.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        return fill(order, view);
    }

private:
    std::map<TaskId, double> weights_;
    CounterRng* rng_{nullptr};
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

TaskId parse_id(const std::string& text) {
    try {
        std::size_t used = 0;
        const int id = std::stoi(text, &used);
        if (used == text.size()) return id;
    } catch (const std::exception&) {
    }
    throw Error(Errc::BadConfig, fmt::format("'{}' is not a task id", text));
}

double parse_number(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(Errc::BadConfig, fmt::format("'{}' is not a number", text));
}

void only_args(const PolicyConfig& config, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : config.args) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(Errc::BadConfig, fmt::format("policy '{}' takes no argument '{}'", config.name, key));
    }
}

std::vector<TaskId> default_static_order(const SystemSpec& spec) {
    if (spec.resources.size() == 2) {
        try {
            const auto roles = two_resource_roles(spec);
            std::vector<TaskId> order{roles.first, roles.second};
            order.insert(order.end(), roles.shared.begin(), roles.shared.end());
            return order;
        } catch (const Error&) {
        }
    }
    return spec.task_ids();
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const SystemSpec& spec) {
    const auto& name = config.name;
    if (name == "ldf") {
        only_args(config, {});
        return std::make_unique<LargestDebtFirst>(spec);
    }
    if (name == "ltdf") {
        only_args(config, {});
        try {
            return std::make_unique<LargestTotalDebtFirst>(spec);
        } catch (const Error& e) {
            throw Error(Errc::UnsupportedTopology, fmt::format("ltdf: {}", e.what()));
        }
    }
    if (name == "static") {
        only_args(config, {"order"});
        auto order = default_static_order(spec);
        if (auto it = config.args.find("order"); it != config.args.end()) {
            std::vector<TaskId> given;
            for (const auto& s : split(it->second, ',')) given.push_back(parse_id(s));
            auto a = given, b = spec.task_ids();
            std::sort(a.begin(), a.end());
            if (a != b) throw Error(Errc::BadConfig, "static order must list every task exactly once");
            order = std::move(given);
        }
        return std::make_unique<StaticPriority>(spec, std::move(order));
    }
    if (name == "random") {
        only_args(config, {});
        return std::make_unique<RandomOrder>(spec);
    }
    if (name == "share") {
        only_args(config, {"weights"});
        std::map<TaskId, double> weights;
        for (const auto& t : spec.tasks) weights[t.id] = implied_workload(t.requirement, t.rate);
        if (auto it = config.args.find("weights"); it != config.args.end()) {
            for (const auto& item : split(it->second, ',')) {
                const auto parts = split(item, ':');
                if (parts.size() != 2) throw Error(Errc::BadConfig, fmt::format("bad weight '{}'", item));
                const TaskId id = parse_id(parts[0]);
                if (!weights.contains(id)) throw Error(Errc::BadConfig, fmt::format("weight for unknown task {}", id));
                const double w = parse_number(parts[1]);
                if (!(w >= 0.0)) throw Error(Errc::BadConfig, fmt::format("negative weight for task {}", id));
                weights[id] = w;
            }
        }
        return std::make_unique<ProportionalShare>(spec, std::move(weights));
    }
    throw Error(Errc::BadConfig, fmt::format("unknown policy '{}'", name));
}

std::unique_ptr<Policy> baseline_policy(BaselineKind kind, const SystemSpec& spec) {
    switch (kind) {
        case BaselineKind::StaticPriority: return make_policy({"static", {}}, spec);
        case BaselineKind::RandomOrder: return make_policy({"random", {}}, spec);
        case BaselineKind::ProportionalShare: return make_policy({"share", {}}, spec);
    }
    throw Error(Errc::BadConfig, "unknown baseline");
}

}  // namespace rtspn
