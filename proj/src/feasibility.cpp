#include "rtspn/feasibility.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace rtspn {

double implied_workload(double requirement, double rate) { return requirement / rate; }

std::vector<std::pair<TaskSet, IdleEstimate>> idle_table(const SystemSpec& spec, const IdleOptions& options) {
    const auto ids = spec.task_ids();
    std::vector<std::pair<TaskSet, IdleEstimate>> out;
    for (auto& subset : enumerate_subsets(ids, false)) {
        auto idle = idle_time_expected(subset, spec, options);
        out.emplace_back(std::move(subset), idle);
    }
    return out;
}

namespace {

constexpr double kUncertaintyWidth = 4.0;

SubsetSlack evaluate(const TaskSet& subset, const IdleEstimate& idle, const std::map<TaskId, double>& q,
                     const SystemSpec& spec) {
    SubsetSlack s;
    s.subset = subset;
    s.idle = idle;
    for (auto id : subset) s.workload += implied_workload(q.at(id), spec.task(id).rate);
    s.load = s.workload + idle.value;
    s.slack = spec.frame_length - s.load;
    s.uncertain = idle.method == IdleMethod::MonteCarlo && std::abs(s.slack) <= kUncertaintyWidth * idle.std_error;
    return s;
}

void finish(FeasibilityVerdict& v, double frame_length) {
    const double tol = kFeasibilityTolerance * frame_length;
    bool uncertain = false;
    for (const auto& s : v.slack_table) {
        if (s.uncertain) {
            uncertain = true;
        } else if (s.slack < -tol) {
            v.violations.push_back(s);
        }
    }
    v.feasible = v.violations.empty();
    v.verdict = !v.feasible ? Verdict::Infeasible : uncertain ? Verdict::BoundaryUncertain : Verdict::Feasible;
}

}  // namespace

FeasibilityVerdict check_single_resource(const SystemSpec& spec, const FeasibilityOptions& options) {
    if (!spec.single_resource())
        throw Error(Errc::NotSingleResource, fmt::format("{} resources", spec.resources.size()));
    if (spec.tasks.size() > options.max_tasks)
        throw Error(Errc::TooManyTasks, fmt::format("{} tasks, limit {}", spec.tasks.size(), options.max_tasks));

    FeasibilityVerdict v;
    for (const auto& t : spec.tasks) v.evaluated_requirements[t.id] = t.requirement;
    for (const auto& [subset, idle] : idle_table(spec, options.idle))
        v.slack_table.push_back(evaluate(subset, idle, v.evaluated_requirements, spec));
    v.margin = spec.frame_length;
    for (const auto& s : v.slack_table) v.margin = std::min(v.margin, s.slack);
    finish(v, spec.frame_length);
    return v;
}

LinearProgram requirement_program(const SystemSpec& original, const ReducedSystem& reduced,
                                  const std::vector<std::pair<TaskSet, IdleEstimate>>& reduced_idle,
                                  bool margin_variable, double capacity_relief) {
    const auto ids = reduced.spec.task_ids();
    const std::size_t nq = ids.size();
    const std::size_t n = nq + (margin_variable ? 1 : 0);
    auto column = [&](TaskId id) {
        return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    };

    LinearProgram lp(n);
    lp.nonnegative.assign(n, true);
    if (margin_variable) {
        lp.nonnegative[nq] = false;
        lp.objective[nq] = 1.0;
    } else {
        lp.objective[column(reduced.combined)] = 1.0;
    }

    const double l1 = reduced.first_rate, l2 = reduced.second_rate;
    auto cover = [&](TaskId original_id, TaskId own, double share) {
        std::vector<double> row(n, 0.0);
        row[column(own)] = 1.0;
        if (share > 0.0) row[column(reduced.combined)] = share;
        lp.add(std::move(row), Relation::GreaterEqual, original.task(original_id).requirement);
    };
    cover(reduced.roles.first, reduced.first_star, first_completion_share(l1, l2, reduced.convention));
    cover(reduced.roles.second, reduced.second_star, second_completion_share(l1, l2, reduced.convention));
    for (auto id : reduced.roles.shared) cover(id, id, 0.0);

    const double frame = reduced.spec.frame_length;
    for (const auto& [subset, idle] : reduced_idle) {
        std::vector<double> row(n, 0.0);
        for (auto id : subset) row[column(id)] = 1.0 / reduced.spec.task(id).rate;
        if (margin_variable) row[nq] = 1.0;
        lp.add(std::move(row), Relation::LessEqual, frame - idle.value + capacity_relief);
    }
    return lp;
}

FeasibilityVerdict check_two_resource(const SystemSpec& spec, const FeasibilityOptions& options) {
    auto reduced = reduce(spec, options.convention);
    const std::size_t reduced_tasks = reduced.spec.tasks.size();
    if (reduced_tasks > options.max_tasks || (std::size_t{1} << reduced_tasks) > kMaxProgramRows)
        throw Error(Errc::TooManyTasks, fmt::format("{} reduced tasks", reduced_tasks));

    const auto table = idle_table(reduced.spec, options.idle);
    const double frame = spec.frame_length;
    const auto ids = reduced.spec.task_ids();

    const auto margin_lp = requirement_program(spec, reduced, table, true);
    const auto best = lp_max(margin_lp, options.lp_tolerance);
    if (best.status == LpStatus::Unbounded) throw Error(Errc::Unbounded, "margin program is unbounded");
    if (best.status != LpStatus::Optimal) throw Error(Errc::LpNumericalFailure, "margin program has no solution");

    FeasibilityVerdict v;
    for (std::size_t i = 0; i < ids.size(); ++i) v.evaluated_requirements[ids[i]] = std::max(best.point[i], 0.0);
    for (const auto& [subset, idle] : table)
        v.slack_table.push_back(evaluate(subset, idle, v.evaluated_requirements, reduced.spec));
    v.margin = best.value;
    finish(v, frame);

    if (v.feasible) {
        const double relief = kFeasibilityTolerance * frame;
        const auto witness = lp_max(requirement_program(spec, reduced, table, false, relief), options.lp_tolerance);
        if (witness.status != LpStatus::Optimal)
            throw Error(Errc::LpNumericalFailure, "no witness for a feasible margin");
        std::map<TaskId, double> w;
        for (std::size_t i = 0; i < ids.size(); ++i) w[ids[i]] = std::max(witness.point[i], 0.0);
        v.witness = std::move(w);
    }
    v.reduced = std::move(reduced);
    return v;
}

FeasibilityVerdict check_feasibility(const SystemSpec& spec, const FeasibilityOptions& options) {
    if (spec.single_resource()) return check_single_resource(spec, options);
    if (spec.resources.size() == 2) return check_two_resource(spec, options);
    throw Error(Errc::UnsupportedTopology,
                fmt::format("no feasibility condition for {} resources", spec.resources.size()));
}

}  // namespace rtspn
