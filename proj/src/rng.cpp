#include "rtspn/rng.hpp"

#include <cmath>

namespace rtspn {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed + mix64(index + 1));
}

CounterRng::result_type CounterRng::operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) noexcept {
    return -std::log1p(-uniform()) / rate;
}

std::size_t CounterRng::below(std::size_t n) noexcept {
    const unsigned __int128 wide = static_cast<unsigned __int128>((*this)()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

}  // namespace rtspn
