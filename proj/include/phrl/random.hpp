#pragma once

// Portable seeded randomness. Draws are derived directly from mt19937_64 output
// (whose sequence is fixed by the standard) so replays are bit-identical
// across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace phrl {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to fold string keys into seeds.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) { return splitmix64(seed ^ splitmix64(value)); }

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value, Rest... rest) {
    return mix_seed(mix_seed(seed, value), static_cast<std::uint64_t>(rest)...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); rejection sampling keeps it unbiased.
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
        std::uint64_t x = engine_();
        while (x > limit) x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Box-Muller; consumes exactly two uniforms per call.
    double normal(double mean, double sd) {
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace phrl
