#include "n2nsdf/rng.hpp"

#include <cmath>
#include <numbers>

namespace n2nsdf {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ULL);
    for (std::uint64_t v : path) h = mix64(h ^ mix64(v + 0x9E3779B97F4A7C15ULL));
    return h;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    // Rejection keeps the draw unbiased for any n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

double CounterRng::normal() noexcept {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace n2nsdf
