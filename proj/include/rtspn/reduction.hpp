#pragma once

// Reduction of the two-resource system (one task per private resource plus
// any number of tasks holding both) to an equivalent single-resource system.
//
// Reduced tasks: 1* keeps the id of the first private task, 2* the id of the
// second, n* keeps n for every shared task, and c* (the concurrent pair) gets
// max id + 1. c* arrives every frame with rate l1 + l2; exactly one of 1*, 2*
// arrives per frame, carrying the residual Exp(l1) or Exp(l2) time of the
// job that outlasts the other.

#include <map>
#include <set>
#include <vector>

#include "rtspn/model.hpp"

namespace rtspn {

/// Which law links the concurrent pair to 1* and 2*.
///  Exact: 1* arrives iff t1 > t2, probability l2/(l1+l2); a c* completion
///         belongs to task 1 with probability l1/(l1+l2).
///  AsPublished: the published formulas, which exchange the two
///         probabilities (1* arrives with l1/(l1+l2), task 1 credited with
///         l2/(l1+l2)). Kept to reproduce the published constructions.
enum class AttributionConvention { Exact, AsPublished };

struct TwoResourceRoles {
    TaskId first{};   // holds only first_resource
    TaskId second{};  // holds only second_resource
    std::vector<TaskId> shared;  // hold both, ascending
    ResourceId first_resource;
    ResourceId second_resource;
};

/// Recognises the two-resource topology; throws NotTwoResourceTopology.
TwoResourceRoles two_resource_roles(const SystemSpec& spec);

struct ReducedSystem {
    SystemSpec spec;  // single resource; requirements left at zero
    TwoResourceRoles roles;
    TaskId first_star{};
    TaskId second_star{};
    TaskId combined{};  // c*
    std::map<TaskId, TaskId> task_map;  // original id -> reduced id (pair members map to 1*/2*)
    double first_rate{};
    double second_rate{};
    AttributionConvention convention{AttributionConvention::Exact};
};

/// Probability that 1* (resp. 2*) arrives in a frame.
double first_star_arrival_probability(double first_rate, double second_rate, AttributionConvention c);
double second_star_arrival_probability(double first_rate, double second_rate, AttributionConvention c);

/// Fraction of c* completions credited to task 1 (resp. task 2).
double first_completion_share(double first_rate, double second_rate, AttributionConvention c);
double second_completion_share(double first_rate, double second_rate, AttributionConvention c);

/// Requires EveryFrame arrivals and the two-resource topology.
ReducedSystem reduce(const SystemSpec& spec, AttributionConvention convention = AttributionConvention::Exact);

/// Maps reduced throughputs (keyed by reduced id) back to the original tasks:
///   q1 = share1 * q_c + q_1*,  q2 = share2 * q_c + q_2*,  qn = q_n*.
/// Missing reduced entries count as zero.
std::map<TaskId, double> lift_throughputs(const ReducedSystem& reduced,
                                          const std::map<TaskId, double>& reduced_throughput);

/// Original tasks to run for a reduced choice, given which original jobs of
/// the current frame have completed. c* is valid only while both pair jobs
/// are unfinished; 1* only after job 2 finished and job 1 did not (and
/// symmetrically for 2*). Throws InvalidCorrespondence otherwise.
std::vector<TaskId> decision_correspondence(const ReducedSystem& reduced, TaskId reduced_choice,
                                            const std::set<TaskId>& completed);

}  // namespace rtspn
