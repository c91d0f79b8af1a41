#include "rtspn/error.hpp"

#include <algorithm>

namespace rtspn {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::NonPositiveRate: return "NonPositiveRate";
        case Errc::NegativeRequirement: return "NegativeRequirement";
        case Errc::RequirementExceedsArrivalRate: return "RequirementExceedsArrivalRate";
        case Errc::UnknownResource: return "UnknownResource";
        case Errc::EmptyTaskList: return "EmptyTaskList";
        case Errc::EmptyResourceSet: return "EmptyResourceSet";
        case Errc::DuplicateTaskId: return "DuplicateTaskId";
        case Errc::BadDistribution: return "BadDistribution";
        case Errc::NonPositiveFrameLength: return "NonPositiveFrameLength";
        case Errc::UnknownTask: return "UnknownTask";
        case Errc::NearEqualRates: return "NearEqualRates";
        case Errc::NotSingleResource: return "NotSingleResource";
        case Errc::TooManyTasks: return "TooManyTasks";
        case Errc::NotTwoResourceTopology: return "NotTwoResourceTopology";
        case Errc::MalformedProgram: return "MalformedProgram";
        case Errc::LpNumericalFailure: return "LpNumericalFailure";
        case Errc::Unbounded: return "Unbounded";
        case Errc::ServiceExceedsFrame: return "ServiceExceedsFrame";
        case Errc::UnsupportedTopology: return "UnsupportedTopology";
        case Errc::PolicyConflict: return "PolicyConflict";
        case Errc::InvalidDecision: return "InvalidDecision";
        case Errc::NonWorkConserving: return "NonWorkConserving";
        case Errc::InvalidCorrespondence: return "InvalidCorrespondence";
        case Errc::BadConfig: return "BadConfig";
        case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string summarize(const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(issue.code)) + "(" + issue.detail + ")";
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(issues.empty() ? Errc::BadConfig : issues.front().code, summarize(issues)),
      issues_(std::move(issues)) {}

bool ValidationError::has(Errc code) const noexcept {
    return std::any_of(issues_.begin(), issues_.end(),
                       [code](const Issue& i) { return i.code == code; });
}

}  // namespace rtspn
