#include <doctest.h>

#include <vector>

#include "rtspn/error.hpp"
#include "rtspn/policy.hpp"
#include "rtspn/rng.hpp"
#include "support.hpp"

using namespace rtspn;

namespace {

DebtLedger ledger_with_debts(const std::vector<std::pair<TaskId, double>>& debts) {
    // One frame with workload 1 and service 1 - d gives debt d.
    std::vector<std::pair<TaskId, double>> w;
    std::vector<double> service;
    for (const auto& [id, d] : debts) {
        w.push_back({id, 1.0});
        service.push_back(1.0 - d);
    }
    DebtLedger ledger(w, 10.0);
    ledger.update(service);
    return ledger;
}

std::vector<TaskState> all_pending(std::initializer_list<TaskId> ids) {
    std::vector<TaskState> out;
    for (auto id : ids) out.push_back({id, JobStatus::Pending, 0.0});
    return out;
}

}  // namespace

TEST_CASE("debt bookkeeping") {
    DebtLedger ledger({{1, 0.3}, {2, 0.5}}, 1.0);
    CHECK(ledger.frame_index() == 1);
    CHECK(ledger.debt(1) == 0.0);
    CHECK(ledger.debt(2) == 0.0);
    ledger.update(std::vector<double>{0.2, 0.5});
    CHECK(ledger.frame_index() == 2);
    CHECK(ledger.debt(1) == doctest::Approx(0.1));
    CHECK(ledger.debt(2) == doctest::Approx(0.0));

    DebtLedger over({{1, 0.3}}, 1.0);
    over.update(std::vector<double>{0.5});
    CHECK(over.debt(1) == doctest::Approx(-0.2));
    CHECK(over.positive_debt(1) == 0.0);

    try {
        over.update(std::vector<double>{1.5});
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ServiceExceedsFrame);
    }
}

TEST_CASE("ldf order") {
    CHECK(ldf_order(ledger_with_debts({{1, 0.5}, {2, 0.2}, {3, 0.9}})) == std::vector<TaskId>{3, 1, 2});
    CHECK(ldf_order(ledger_with_debts({{1, 0.4}, {2, 0.4}, {3, 0.4}})) == std::vector<TaskId>{1, 2, 3});
    DebtLedger fresh({{3, 0.1}, {1, 0.9}, {2, 0.5}}, 1.0);
    CHECK(ldf_order(fresh) == std::vector<TaskId>{1, 2, 3});
}

TEST_CASE("ltdf selection") {
    const TwoResourceRoles roles{1, 2, {3}, "r1", "r2"};
    const auto ledger = ledger_with_debts({{1, 0.3}, {2, 0.2}, {3, 0.4}});
    auto tasks = all_pending({1, 2, 3});
    CHECK(ltdf_select(ledger, tasks, roles).active == std::vector<TaskId>{1, 2});

    const auto flat = ledger_with_debts({{1, -0.1}, {2, 0.0}, {3, -0.2}});
    CHECK(ltdf_select(flat, tasks, roles).active == std::vector<TaskId>{1, 2});

    const auto d = ledger_with_debts({{1, 0.1}, {2, 0.5}, {3, 0.3}});
    tasks[1].status = JobStatus::Completed;
    CHECK(ltdf_select(d, tasks, roles).active == std::vector<TaskId>{3});

    for (auto& t : tasks) t.status = JobStatus::Completed;
    CHECK(ltdf_select(d, tasks, roles).active.empty());
}

TEST_CASE("baseline policies") {
    const auto spec = testing::single({{3, 1.0, 0.1}, {1, 1.0, 0.1}, {2, 1.0, 0.1}});
    auto ledger = DebtLedger::for_spec(spec);
    auto tasks = all_pending({1, 2, 3});
    FrameView view{1, 0.0, 1.0, tasks, &ledger};

    auto fixed = baseline_policy(BaselineKind::StaticPriority, spec);
    CHECK(fixed->select(view).active == std::vector<TaskId>{1});
    tasks[0].status = JobStatus::Completed;
    CHECK(fixed->select(view).active == std::vector<TaskId>{2});
    tasks[0].status = JobStatus::Pending;

    auto decisions = [&](std::uint64_t seed) {
        auto p = make_policy({"random", {}}, spec);
        CounterRng rng(seed);
        std::vector<TaskId> seen;
        for (int f = 0; f < 50; ++f) {
            p->begin_frame(view, rng);
            seen.push_back(p->select(view).active.front());
        }
        return seen;
    };
    const auto a = decisions(5);
    CHECK(a == decisions(5));
    CHECK(std::set<TaskId>(a.begin(), a.end()).size() == 3);

    auto share = make_policy({"share", {{"weights", "1:1,2:0,3:0"}}}, spec);
    CounterRng rng(9);
    share->begin_frame(view, rng);
    CHECK(share->select(view).active == std::vector<TaskId>{1});
}

TEST_CASE("static priority on two resources") {
    const auto spec = testing::two_resource({{1, 1.0, 0.1}, {2, 1.0, 0.1}, {4, 1.0, 0.1}, {3, 1.0, 0.1}});
    auto ledger = DebtLedger::for_spec(spec);
    auto tasks = all_pending({1, 2, 3, 4});
    FrameView view{1, 0.0, 1.0, tasks, &ledger};
    auto p = baseline_policy(BaselineKind::StaticPriority, spec);
    CHECK(p->select(view).active == std::vector<TaskId>{1, 2});
    tasks[0].status = JobStatus::Completed;
    tasks[1].status = JobStatus::Completed;
    CHECK(p->select(view).active == std::vector<TaskId>{3});
}

TEST_CASE("policy configuration errors") {
    const auto single = testing::single({{1, 1.0, 0.1}});
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::ParseError;
    };
    CHECK(code_of([&] { make_policy({"fifo", {}}, single); }) == Errc::BadConfig);
    CHECK(code_of([&] { make_policy({"ldf", {{"x", "1"}}}, single); }) == Errc::BadConfig);
    CHECK(code_of([&] { make_policy({"ltdf", {}}, single); }) == Errc::UnsupportedTopology);
    CHECK(code_of([&] { make_policy({"static", {{"order", "1,7"}}}, single); }) != Errc::ParseError);
}
