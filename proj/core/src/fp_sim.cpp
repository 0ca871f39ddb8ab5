// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/fp_sim.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

namespace lamp::fp {

FpFormat::FpFormat(int mantissa_bits) : mu_(mantissa_bits) {
    if (mantissa_bits < kMinMantissaBits || mantissa_bits > kMaxMantissaBits) {
        throw ContractViolation("FpFormat: mantissa bits must be in [1, 23], got " +
                                std::to_string(mantissa_bits));
    }
}

double FpFormat::unit_roundoff() const noexcept { return std::ldexp(1.0, -(mu_ + 1)); }

float round_ps(float x, FpFormat fmt) noexcept {
    const int drop = FpFormat::kMaxMantissaBits - fmt.mantissa_bits();
    if (drop == 0) return x;

    std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
    constexpr std::uint32_t kExpMask = 0x7F800000u;
    if ((bits & kExpMask) == kExpMask) return x;  // inf, nan

    // Rounding the magnitude bits as an integer handles normals and subnormals alike; a carry
    // out of the mantissa bumps the exponent, and out of the top binade produces infinity.
    const std::uint32_t unit = 1u << drop;
    const std::uint32_t low_mask = unit - 1u;
    const std::uint32_t half = unit >> 1;
    const std::uint32_t low = bits & low_mask;
    bits &= ~low_mask;
    if (low > half || (low == half && (bits & unit) != 0)) {
        bits += unit;
    }
    return std::bit_cast<float>(bits);
}

namespace {

void check_lengths(std::span<const float> a, std::span<const float> b, const char* who) {
    if (a.size() != b.size()) {
        throw ContractViolation(std::string(who) + ": vector lengths differ (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
    }
}

void check_matmul_shapes(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols != b.rows) {
        throw ContractViolation("matmul: inner dimensions disagree (" + std::to_string(a.cols) +
                                " vs " + std::to_string(b.rows) + ")");
    }
}

}  // namespace

float plain_dot(std::span<const float> a, std::span<const float> b) {
    check_lengths(a, b, "plain_dot");
    float c = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float p = a[i] * b[i];
        c = c + p;
    }
    return c;
}

float mixed_dot(std::span<const float> a, std::span<const float> b, const MixedDotSpec& spec) {
    check_lengths(a, b, "mixed_dot");
    const FpFormat fmt = spec.accumulate_format;
    float c = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float p = a[i] * b[i];
        const float s = c + p;
        c = round_ps(s, fmt);
    }
    return c;
}

Tensor2D mixed_matmul(const Tensor2D& a, const Tensor2D& b, const MixedDotSpec& spec,
                      const std::optional<SelectionMask>& recompute) {
    check_matmul_shapes(a, b);
    if (recompute && recompute->size() != a.rows * b.cols) {
        throw ContractViolation("mixed_matmul: mask size does not match output shape");
    }
    Tensor2D c(a.rows, b.cols);
    std::vector<float> column(b.rows);
    for (std::size_t j = 0; j < b.cols; ++j) {
        for (std::size_t k = 0; k < b.rows; ++k) column[k] = b(k, j);
        for (std::size_t i = 0; i < a.rows; ++i) {
            const bool full = recompute && (*recompute)[i * b.cols + j];
            c(i, j) = full ? plain_dot(a.row(i), column) : mixed_dot(a.row(i), column, spec);
        }
    }
    return c;
}

Tensor2D plain_matmul(const Tensor2D& a, const Tensor2D& b) {
    check_matmul_shapes(a, b);
    Tensor2D c(a.rows, b.cols);
    std::vector<float> column(b.rows);
    for (std::size_t j = 0; j < b.cols; ++j) {
        for (std::size_t k = 0; k < b.rows; ++k) column[k] = b(k, j);
        for (std::size_t i = 0; i < a.rows; ++i) c(i, j) = plain_dot(a.row(i), column);
    }
    return c;
}

}  // namespace lamp::fp
