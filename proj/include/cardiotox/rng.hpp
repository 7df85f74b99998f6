#pragma once

#include <array>
#include <cstdint>

namespace cardiotox {

/// xoshiro256** (Blackman & Vigna, 2018) seeded through SplitMix64.
///
/// Everything that consumes randomness (synthetic cohorts, fold assignment,
/// bootstrap resamples) draws from this generator so that outputs are
/// byte-identical across standard libraries. Constants:
///   SplitMix64: state += 0x9E3779B97F4A7C15;
///               z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///               z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^= z >> 31
///   xoshiro256**: result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
///               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n), unbiased (rejection on the low tail).
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (one variate per call, no caching).
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace cardiotox
