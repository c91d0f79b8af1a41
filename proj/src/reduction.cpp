#include "rtspn/reduction.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rtspn {

TwoResourceRoles two_resource_roles(const SystemSpec& spec) {
    auto reject = [](const std::string& why) -> TwoResourceRoles {
        throw Error(Errc::NotTwoResourceTopology, why);
    };
    if (spec.resources.size() != 2) return reject(fmt::format("{} resources", spec.resources.size()));

    TwoResourceRoles roles;
    roles.first_resource = *spec.resources.begin();
    roles.second_resource = *std::next(spec.resources.begin());
    std::vector<TaskId> firsts, seconds;
    for (const auto& t : spec.tasks) {
        if (t.resources.size() == 2) {
            roles.shared.push_back(t.id);
        } else if (t.resources.contains(roles.first_resource)) {
            firsts.push_back(t.id);
        } else {
            seconds.push_back(t.id);
        }
    }
    if (firsts.size() != 1 || seconds.size() != 1)
        return reject(fmt::format("need exactly one task per private resource, found {} and {}",
                                  firsts.size(), seconds.size()));
    roles.first = firsts.front();
    roles.second = seconds.front();
    std::sort(roles.shared.begin(), roles.shared.end());
    return roles;
}

double first_star_arrival_probability(double l1, double l2, AttributionConvention c) {
    return c == AttributionConvention::Exact ? l2 / (l1 + l2) : l1 / (l1 + l2);
}

double second_star_arrival_probability(double l1, double l2, AttributionConvention c) {
    return c == AttributionConvention::Exact ? l1 / (l1 + l2) : l2 / (l1 + l2);
}

double first_completion_share(double l1, double l2, AttributionConvention c) {
    return c == AttributionConvention::Exact ? l1 / (l1 + l2) : l2 / (l1 + l2);
}

double second_completion_share(double l1, double l2, AttributionConvention c) {
    return c == AttributionConvention::Exact ? l2 / (l1 + l2) : l1 / (l1 + l2);
}

ReducedSystem reduce(const SystemSpec& spec, AttributionConvention convention) {
    if (!std::holds_alternative<EveryFrame>(spec.arrivals))
        throw Error(Errc::NotTwoResourceTopology, "reduction needs every-frame arrivals");
    const auto roles = two_resource_roles(spec);

    ReducedSystem out;
    out.roles = roles;
    out.convention = convention;
    out.first_rate = spec.task(roles.first).rate;
    out.second_rate = spec.task(roles.second).rate;
    out.first_star = roles.first;
    out.second_star = roles.second;
    out.combined = spec.tasks.back().id + 1;
    out.task_map[roles.first] = out.first_star;
    out.task_map[roles.second] = out.second_star;
    for (auto id : roles.shared) out.task_map[id] = id;

    const ResourceId single = roles.first_resource + "+" + roles.second_resource;
    auto& reduced = out.spec;
    reduced.frame_length = spec.frame_length;
    reduced.resources = {single};
    for (const auto& t : spec.tasks) reduced.tasks.push_back({t.id, t.rate, 0.0, {single}});
    reduced.tasks.push_back({out.combined, out.first_rate + out.second_rate, 0.0, {single}});

    TaskSet always(roles.shared.begin(), roles.shared.end());
    always.push_back(out.combined);
    auto with = [&](TaskId extra) {
        TaskSet s = always;
        s.push_back(extra);
        std::sort(s.begin(), s.end());
        return s;
    };
    SubsetDistribution dist;
    dist.entries.emplace_back(with(out.first_star),
                              first_star_arrival_probability(out.first_rate, out.second_rate, convention));
    dist.entries.emplace_back(with(out.second_star),
                              second_star_arrival_probability(out.first_rate, out.second_rate, convention));
    reduced.arrivals = std::move(dist);
    out.spec = validate_spec(std::move(reduced));
    return out;
}

std::map<TaskId, double> lift_throughputs(const ReducedSystem& reduced,
                                          const std::map<TaskId, double>& reduced_throughput) {
    auto at = [&](TaskId id) {
        auto it = reduced_throughput.find(id);
        return it == reduced_throughput.end() ? 0.0 : it->second;
    };
    const double qc = at(reduced.combined);
    std::map<TaskId, double> out;
    out[reduced.roles.first] =
        first_completion_share(reduced.first_rate, reduced.second_rate, reduced.convention) * qc +
        at(reduced.first_star);
    out[reduced.roles.second] =
        second_completion_share(reduced.first_rate, reduced.second_rate, reduced.convention) * qc +
        at(reduced.second_star);
    for (auto id : reduced.roles.shared) out[id] = at(id);
    return out;
}

std::vector<TaskId> decision_correspondence(const ReducedSystem& reduced, TaskId choice,
                                            const std::set<TaskId>& completed) {
    const TaskId t1 = reduced.roles.first;
    const TaskId t2 = reduced.roles.second;
    const bool done1 = completed.contains(t1);
    const bool done2 = completed.contains(t2);

    if (choice == reduced.combined) {
        if (done1 || done2)
            throw Error(Errc::InvalidCorrespondence, "c* chosen after a pair job completed");
        return {std::min(t1, t2), std::max(t1, t2)};
    }
    if (choice == reduced.first_star) {
        if (!done2 || done1)
            throw Error(Errc::InvalidCorrespondence,
                        fmt::format("{}* chosen while job {} is unfinished", t1, done2 ? t1 : t2));
        return {t1};
    }
    if (choice == reduced.second_star) {
        if (!done1 || done2)
            throw Error(Errc::InvalidCorrespondence,
                        fmt::format("{}* chosen while job {} is unfinished", t2, done1 ? t2 : t1));
        return {t2};
    }
    if (std::binary_search(reduced.roles.shared.begin(), reduced.roles.shared.end(), choice)) return {choice};
    throw Error(Errc::UnknownTask, fmt::format("reduced task {}", choice));
}

}  // namespace rtspn
