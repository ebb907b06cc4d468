#pragma once

#include <cstdint>
#include <initializer_list>

namespace n2nsdf {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a seed and a path of integers,
/// e.g. derive_seed(seed, {epoch, pair, member}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based SplitMix64 stream.
///
/// The i-th output (0-based) is mix64(key + (i + 1) * 0x9E3779B97F4A7C15), so
/// any position can be reproduced from (key, i) alone and the sequence is
/// bit-identical on every platform. split() hashes a stream id into a new key.
/// Real-valued draws use only integer arithmetic plus std::log/std::sqrt/
/// std::cos/std::sin.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    double uniform01() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal via Box-Muller; consumes two outputs per call.
    double normal() noexcept;

    CounterRng split(std::uint64_t stream) const noexcept { return CounterRng(derive_seed(key_, {stream})); }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace n2nsdf
