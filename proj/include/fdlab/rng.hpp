#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fdlab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stateless generator: every draw is a pure function of (seed, index), so
// parallel consumers get the same numbers however the work is partitioned.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6A09E667F3BCC909ull)) {}

    constexpr std::uint64_t bits(std::uint64_t index) const {
        return splitmix64(key_ + index * 0xD1B54A32D192ED03ull);
    }

    // Uniform in the open interval (0, 1).
    double uniform(std::uint64_t index) const {
        return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal draw number `index` (Box-Muller on two uniforms).
    double normal(std::uint64_t index) const {
        double u1 = uniform(2 * index);
        double u2 = uniform(2 * index + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform integer with the given number of low bits.
    std::uint64_t word_bits(std::uint64_t index, int width) const {
        if (width >= 64) return bits(index);
        return bits(index) & ((std::uint64_t{1} << width) - 1);
    }

private:
    std::uint64_t key_;
};

} // namespace fdlab
