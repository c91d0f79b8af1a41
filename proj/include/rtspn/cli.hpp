#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtspn/model.hpp"
#include "rtspn/policy.hpp"
#include "rtspn/reduction.hpp"

namespace rtspn::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kInfeasible = 3,
    kBoundaryUncertain = 4,
    kRuntimeFailure = 5,
};

struct SweepAxis {
    std::vector<TaskId> tasks;        // empty for frame_length
    std::string parameter{"requirement"};  // requirement | rate | frame_length
    double from{0.0};
    double to{1.0};
    std::size_t steps{11};

    double value(std::size_t i) const;
    void validate() const;  // throws BadConfig
};

struct ExperimentConfig {
    std::string command;
    std::string spec_path;
    PolicyConfig policy;
    std::size_t frames{10000};
    std::uint64_t seed{1};
    std::size_t replications{1};
    std::size_t jobs{1};
    bool simulate{false};  // sweep: also simulate each grid point
    SweepAxis axis;
    AttributionConvention convention{AttributionConvention::Exact};
    std::string out_path;
    std::string format{"text"};
};

/// Applies the axis value to a copy of the spec and revalidates it.
SystemSpec apply_axis(const SystemSpec& spec, const SweepAxis& axis, double value);

/// Writes the sweep CSV: param_value, feasible, min_slack, q_hat_<id>..., met.
/// feasible is 1, 0, or -1 for a boundary-uncertain verdict; q_hat and met
/// are empty unless config.simulate. On a failing grid point the rows before
/// it are kept and a `partial=true` footer is written; returns kRuntimeFailure.
int sweep(const ExperimentConfig& config, const SystemSpec& spec, std::ostream& csv, std::ostream& err);

/// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Installs the stderr logger; RTSPN_LOG selects the level (default warn).
void init_logging();

}  // namespace rtspn::cli
