#pragma once

// Expected forced idle time per frame, E[(T - sum of processing times)^+],
// for a work-conserving server that only ever serves a subset of tasks.

#include <cstdint>
#include <span>

#include "rtspn/model.hpp"

namespace rtspn {

enum class IdleMethod { Analytic, MonteCarlo };

struct IdleEstimate {
    double value{0.0};      // in [0, T]
    double std_error{0.0};  // zero for analytic results
    IdleMethod method{IdleMethod::Analytic};
    std::uint64_t samples{0};
};

/// Relative separation below which two rates count as equal.
inline constexpr double kRateSeparation = 1e-9;

/// E[(T - X)^+] for X a sum of independent exponentials with pairwise
/// distinct rates (hypoexponential closed form). Empty list gives T.
/// Throws NearEqualRates when two rates are within kRateSeparation.
double residual_deficit(std::span<const double> rates, double frame_length);

/// Monte Carlo estimate of the same quantity; valid for repeated rates.
IdleEstimate residual_deficit_monte_carlo(std::span<const double> rates, double frame_length,
                                          std::uint64_t samples, std::uint64_t seed);

struct IdleOptions {
    std::uint64_t fallback_samples{1'000'000};
    std::uint64_t fallback_seed{0x1d1e5eedULL};
};

/// E[I_S], mixing residual_deficit over the arrival law marginalised onto S.
/// Arrival sets with near-equal rates fall back to Monte Carlo, in which
/// case the estimate is tagged MonteCarlo and carries a standard error.
IdleEstimate idle_time_expected(const TaskSet& subset, const SystemSpec& spec,
                                const IdleOptions& options = {});

/// Direct simulation of E[I_S]: draws the arrival set and processing times.
/// Deterministic in `seed`.
IdleEstimate idle_time_monte_carlo(const TaskSet& subset, const SystemSpec& spec,
                                   std::uint64_t samples, std::uint64_t seed);

}  // namespace rtspn
