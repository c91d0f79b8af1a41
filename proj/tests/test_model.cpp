#include <doctest.h>

#include "rtspn/error.hpp"
#include "rtspn/model.hpp"
#include "rtspn/spec_io.hpp"
#include "support.hpp"

using namespace rtspn;

namespace {

Errc first_issue(SystemSpec s) {
    try {
        validate_spec(std::move(s));
    } catch (const ValidationError& e) {
        return e.issues().front().code;
    }
    FAIL("expected a validation error");
    return Errc::BadConfig;
}

SystemSpec raw_single(double rate, double q, ArrivalModel a = EveryFrame{}) {
    SystemSpec s;
    s.resources = {"cpu"};
    s.tasks.push_back({1, rate, q, {"cpu"}});
    s.arrivals = std::move(a);
    return s;
}

}  // namespace

TEST_CASE("validation rejects bad specs") {
    CHECK(first_issue(raw_single(0.0, 0.1)) == Errc::NonPositiveRate);
    CHECK(first_issue(raw_single(1.0, -0.1)) == Errc::NegativeRequirement);
    CHECK(first_issue(raw_single(1.0, 0.6, IndependentBernoulli{{{1, 0.5}}})) ==
          Errc::RequirementExceedsArrivalRate);
    CHECK_NOTHROW(validate_spec(raw_single(1.0, 0.5)));

    auto s = raw_single(1.0, 0.1);
    s.tasks.front().resources = {"gpu"};
    CHECK(first_issue(s) == Errc::UnknownResource);

    s = raw_single(1.0, 0.1);
    s.tasks.push_back(s.tasks.front());
    CHECK(first_issue(s) == Errc::DuplicateTaskId);

    s = raw_single(1.0, 0.1);
    s.frame_length = 0.0;
    CHECK(first_issue(s) == Errc::NonPositiveFrameLength);

    s = raw_single(1.0, 0.1, SubsetDistribution{{{{1}, 0.3}, {{}, 0.3}}});
    CHECK(first_issue(s) == Errc::BadDistribution);

    s = raw_single(1.0, 0.1);
    s.tasks.clear();
    CHECK(first_issue(s) == Errc::EmptyTaskList);
}

TEST_CASE("validation reports every issue") {
    SystemSpec s;
    s.resources = {"cpu"};
    s.tasks.push_back({1, -1.0, -1.0, {"cpu"}});
    s.tasks.push_back({2, 1.0, 0.1, {"disk"}});
    try {
        validate_spec(s);
        FAIL("no error");
    } catch (const ValidationError& e) {
        CHECK(e.has(Errc::NonPositiveRate));
        CHECK(e.has(Errc::NegativeRequirement));
        CHECK(e.has(Errc::UnknownResource));
    }
}

TEST_CASE("subset distributions") {
    const TaskSet both{1, 2};
    auto every = arrival_subset_distribution(EveryFrame{}, both);
    REQUIRE(every.size() == 1);
    CHECK(every.at(both) == 1.0);

    auto bern = arrival_subset_distribution(IndependentBernoulli{{{1, 0.5}, {2, 0.5}}}, both);
    REQUIRE(bern.size() == 4);
    for (const auto& [set, p] : bern) CHECK(p == doctest::Approx(0.25));

    SubsetDistribution stars{{{{1}, 0.5}, {{2}, 0.5}}};
    auto same = arrival_subset_distribution(stars, both);
    CHECK(same.size() == 2);
    CHECK(same.at({1}) == 0.5);
    CHECK(same.at({2}) == 0.5);

    auto marginal = arrival_subset_distribution(stars, TaskSet{1});
    CHECK(marginal.at({1}) == 0.5);
    CHECK(marginal.at({}) == 0.5);
}

TEST_CASE("mean arrival rates") {
    CHECK(mean_arrival_rate(EveryFrame{}, TaskSet{1, 2}, 2) == 1.0);
    CHECK(mean_arrival_rate(IndependentBernoulli{{{1, 0.3}}}, TaskSet{1}, 1) == doctest::Approx(0.3));
    SubsetDistribution d{{{{1}, 0.2}, {{1, 2}, 0.3}, {{}, 0.5}}};
    CHECK(mean_arrival_rate(d, TaskSet{1, 2}, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mean_arrival_rate(testing::single({{1, 1.0, 0.0}}), 7), Error);
}

TEST_CASE("markov traffic uses its stationary law") {
    MarkovArrivals chain{{{1}, {}}, {{0.9, 0.1}, {0.3, 0.7}}};
    const auto pi = stationary_distribution(chain);
    CHECK(pi[0] == doctest::Approx(0.75));
    CHECK(pi[1] == doctest::Approx(0.25));
    CHECK(mean_arrival_rate(chain, TaskSet{1}, 1) == doctest::Approx(0.75));
}

TEST_CASE("subset enumeration order") {
    const TaskSet ids{1, 2, 3};
    auto subsets = enumerate_subsets(ids, false);
    REQUIRE(subsets.size() == 7);
    CHECK(subsets[0] == TaskSet{1});
    CHECK(subsets[3] == TaskSet{1, 2});
    CHECK(subsets[5] == TaskSet{2, 3});
    CHECK(subsets[6] == TaskSet{1, 2, 3});
    CHECK(enumerate_subsets(ids, true).front().empty());
}

TEST_CASE("json round trip and strictness") {
    const auto spec = testing::single({{1, 2.0, 0.3}, {2, 1.0, 0.1}}, 2.0,
                                      IndependentBernoulli{{{1, 0.5}, {2, 0.9}}});
    const auto doc = spec_to_json(spec);
    const auto back = spec_from_json(doc);
    CHECK(spec_to_json(back) == doc);
    CHECK(back.frame_length == 2.0);

    auto bad = doc;
    bad["frame_lenght"] = 1.0;
    try {
        spec_from_json(bad);
        FAIL("typo accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseError);
    }
    auto bad_task = doc;
    bad_task["tasks"][0]["rte"] = 1.0;
    CHECK_THROWS_AS(spec_from_json(bad_task), Error);
    CHECK(digest_hex("abc") == digest_hex("abc"));
    CHECK(digest_hex("abc") != digest_hex("abd"));
}
