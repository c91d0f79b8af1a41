#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtspn {

enum class Errc {
    NonPositiveRate,
    NegativeRequirement,
    RequirementExceedsArrivalRate,
    UnknownResource,
    EmptyTaskList,
    EmptyResourceSet,
    DuplicateTaskId,
    BadDistribution,
    NonPositiveFrameLength,
    UnknownTask,
    NearEqualRates,
    NotSingleResource,
    TooManyTasks,
    NotTwoResourceTopology,
    MalformedProgram,
    LpNumericalFailure,
    Unbounded,
    ServiceExceedsFrame,
    UnsupportedTopology,
    PolicyConflict,
    InvalidDecision,
    NonWorkConserving,
    InvalidCorrespondence,
    BadConfig,
    ParseError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

struct Issue {
    Errc code;
    std::string detail;  // names the task, resource or subset at fault
};

// Thrown by validate_spec with every violated invariant, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Issue> issues);

    const std::vector<Issue>& issues() const noexcept { return issues_; }
    bool has(Errc code) const noexcept;

private:
    std::vector<Issue> issues_;
};

}  // namespace rtspn
