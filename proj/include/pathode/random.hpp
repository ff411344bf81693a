#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pathode {

// Counter-based stream: the k-th draw (k = 0, 1, ...) is
//   splitmix64_mix(seed + (k + 1) * 0x9E3779B97F4A7C15)
// which is exactly the SplitMix64 sequence seeded with `seed`.
// Uniform doubles take the top 53 bits: (u >> 11) * 2^-53, so they lie in [0, 1).
// Normals use Box-Muller on two consecutive uniforms (cosine branch only).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // 1 - u keeps the logarithm argument in (0, 1].
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace pathode
