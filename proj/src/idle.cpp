#include "rtspn/idle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rtspn/rng.hpp"
#include "rtspn/stats.hpp"

namespace rtspn {

namespace {

// Above this many terms the coefficient products are accumulated in log space.
constexpr std::size_t kDirectProductLimit = 8;

void require_distinct(std::span<const double> rates) {
    std::vector<double> sorted(rates.begin(), rates.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] <= kRateSeparation * sorted[i])
            throw Error(Errc::NearEqualRates,
                        fmt::format("rates {} and {} are not separable", sorted[i - 1], sorted[i]));
    }
}

double clamp_to_frame(double value, double frame_length) {
    const double slack = 1e-8 * frame_length;
    if (value < -slack || value > frame_length + slack)
        spdlog::warn("residual deficit {} clamped into [0, {}]", value, frame_length);
    return std::clamp(value, 0.0, frame_length);
}

}  // namespace

double residual_deficit(std::span<const double> rates, double frame_length) {
    for (double r : rates) {
        if (!(r > 0.0)) throw Error(Errc::NonPositiveRate, fmt::format("rate {}", r));
    }
    if (rates.empty()) return frame_length;
    require_distinct(rates);

    const std::size_t n = rates.size();
    double expected_busy = 0.0;  // E[min(X, T)]
    for (std::size_t i = 0; i < n; ++i) {
        const double li = rates[i];
        const double mass = -std::expm1(-li * frame_length);  // 1 - e^{-li T}
        double coeff = 0.0;
        if (n <= kDirectProductLimit) {
            coeff = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) coeff *= rates[j] / (rates[j] - li);
            }
        } else {
            double log_mag = 0.0;
            bool negative = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double diff = rates[j] - li;
                log_mag += std::log(rates[j]) - std::log(std::abs(diff));
                negative ^= diff < 0.0;
            }
            coeff = negative ? -std::exp(log_mag) : std::exp(log_mag);
        }
        expected_busy += coeff / li * mass;
    }
    return clamp_to_frame(frame_length - expected_busy, frame_length);
}

IdleEstimate residual_deficit_monte_carlo(std::span<const double> rates, double frame_length,
                                          std::uint64_t samples, std::uint64_t seed) {
    if (rates.empty()) return {frame_length, 0.0, IdleMethod::MonteCarlo, samples};
    CounterRng rng(seed);
    RunningStats stats;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double work = 0.0;
        for (double r : rates) work += rng.exponential(r);
        stats.add(std::max(frame_length - work, 0.0));
    }
    return {stats.mean(), stats.standard_error(), IdleMethod::MonteCarlo, samples};
}

namespace {

void require_members(const TaskSet& subset, const SystemSpec& spec) {
    for (auto id : subset) {
        if (spec.find_task(id) == nullptr) throw Error(Errc::UnknownTask, fmt::format("task {}", id));
    }
}

std::vector<double> rates_of(const TaskSet& set, const SystemSpec& spec) {
    std::vector<double> out;
    out.reserve(set.size());
    for (auto id : set) out.push_back(spec.task(id).rate);
    return out;
}

}  // namespace

IdleEstimate idle_time_expected(const TaskSet& subset, const SystemSpec& spec, const IdleOptions& options) {
    require_members(subset, spec);
    const double frame = spec.frame_length;
    if (subset.empty()) return {frame, 0.0, IdleMethod::Analytic, 0};

    IdleEstimate out;
    double variance = 0.0;
    std::uint64_t index = 0;
    for (const auto& [arrived, prob] : arrival_subset_distribution(spec.arrivals, subset)) {
        const auto rates = rates_of(arrived, spec);
        double deficit = 0.0;
        try {
            deficit = residual_deficit(rates, frame);
        } catch (const Error& e) {
            if (e.code() != Errc::NearEqualRates) throw;
            const auto mc = residual_deficit_monte_carlo(rates, frame, options.fallback_samples,
                                                         split_seed(options.fallback_seed, index));
            spdlog::debug("idle fallback to Monte Carlo for {{{}}}", format_subset(arrived, ','));
            deficit = mc.value;
            variance += prob * prob * mc.std_error * mc.std_error;
            out.method = IdleMethod::MonteCarlo;
            out.samples = options.fallback_samples;
        }
        out.value += prob * deficit;
        ++index;
    }
    out.value = std::clamp(out.value, 0.0, frame);
    out.std_error = std::sqrt(variance);
    return out;
}

IdleEstimate idle_time_monte_carlo(const TaskSet& subset, const SystemSpec& spec, std::uint64_t samples,
                                   std::uint64_t seed) {
    require_members(subset, spec);
    const double frame = spec.frame_length;
    if (subset.empty()) return {frame, 0.0, IdleMethod::MonteCarlo, samples};

    std::vector<std::vector<double>> rate_sets;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& [arrived, prob] : arrival_subset_distribution(spec.arrivals, subset)) {
        rate_sets.push_back(rates_of(arrived, spec));
        acc += prob;
        cumulative.push_back(acc);
    }

    CounterRng rng(seed);
    RunningStats stats;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const double u = rng.uniform() * acc;
        auto pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                             cumulative.begin());
        pick = std::min(pick, rate_sets.size() - 1);
        double work = 0.0;
        for (double r : rate_sets[pick]) work += rng.exponential(r);
        stats.add(std::max(frame - work, 0.0));
    }
    return {stats.mean(), stats.standard_error(), IdleMethod::MonteCarlo, samples};
}

}  // namespace rtspn
