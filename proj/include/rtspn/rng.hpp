#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace rtspn {

/// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Derives the seed of child stream `index` from `seed`:
///   split(seed, index) = mix64(seed + mix64(index + 1)).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Counter-based generator: the i-th output of stream `key` is
///   mix64(key + (i + 1) * 0x9e3779b97f4a7c15),
/// so any draw is addressable by (key, counter) and streams are portable.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits: (x >> 11) * 2^-53.
    double uniform() noexcept;

    /// Exponential with the given rate by inversion: -log1p(-u) / rate.
    double exponential(double rate) noexcept;

    /// Uniform integer in [0, n) by multiply-shift.
    std::size_t below(std::size_t n) noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace rtspn
