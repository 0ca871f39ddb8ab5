// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Test-only reference implementations. None of these call into the library paths they are
// used to check.

#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lamp/random.hpp"

namespace lamp::testing {

/// Rounds x to mu mantissa bits by scaling to an integer mantissa in double precision and
/// applying nearbyint (ties to even under the default rounding mode).
inline float reference_round(float x, int mu) {
    if (!std::isfinite(x) || x == 0.0f) return x;
    const double d = x;
    int e = 0;
    std::frexp(std::abs(d), &e);  // |d| = m * 2^e, m in [0.5, 1)
    const int exponent = std::max(e - 1, -126);
    const double ulp = std::ldexp(1.0, exponent - mu);
    const double q = std::nearbyint(d / ulp) * ulp;
    if (std::abs(q) > static_cast<double>(FLT_MAX)) return std::copysign(INFINITY, x);
    return static_cast<float>(q);
}

inline bool same_bits(float a, float b) {
    return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
}

/// Dense || |K| (1 - q) ||_inf with K = I - 1 w^T built entrywise.
inline double dense_rank_one_masked_norm(const std::vector<double>& w,
                                         const std::vector<std::uint8_t>& q) {
    const std::size_t n = w.size();
    double best = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (q[c]) continue;
            row += std::abs((r == c ? 1.0 : 0.0) - w[c]);
        }
        best = std::max(best, row);
    }
    return best;
}

/// Central finite-difference Jacobian of f: R^n -> R^n.
inline std::vector<std::vector<double>> finite_difference_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> jac(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        auto plus = x;
        auto minus = x;
        plus[c] += h;
        minus[c] -= h;
        const auto fp = f(plus);
        const auto fm = f(minus);
        for (std::size_t r = 0; r < n; ++r) jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
    }
    return jac;
}

inline std::vector<double> softmax_double(const std::vector<double>& y) {
    double m = y[0];
    for (double v : y) m = std::max(m, v);
    std::vector<double> out(y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += out[i] = std::exp(y[i] - m);
    for (auto& v : out) v /= s;
    return out;
}

inline std::vector<double> rmsnorm_double(const std::vector<double>& y) {
    double sq = 0.0;
    for (double v : y) sq += v * v;
    const double scale = std::sqrt(static_cast<double>(y.size()) / sq);
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * scale;
    return out;
}

/// Random probability vector: softmax of normal scores at a random temperature, so the
/// draws range from near-uniform to near-one-hot.
inline std::vector<double> random_probability(CounterRng& rng, std::size_t n) {
    const double temperature = std::exp(3.0 * rng.uniform() - 1.0);
    std::vector<double> y(n);
    for (auto& v : y) v = temperature * rng.normal();
    return softmax_double(y);
}

inline std::vector<std::uint8_t> random_flags(CounterRng& rng, std::size_t n) {
    std::vector<std::uint8_t> q(n);
    const double density = rng.uniform();
    for (auto& f : q) f = rng.uniform() < density ? 1 : 0;
    return q;
}

}  // namespace lamp::testing
