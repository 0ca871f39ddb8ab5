// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace lamp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a tuple of counters; seeds per-row / per-sequence streams.
inline constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// SplitMix64 stream. Fully specified output on every platform, unlike the std distributions.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound); bound must be positive.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r = next();
        while (r >= limit) r = next();
        return r % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one draw per call, the sine branch is discarded).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace lamp
