// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Simulation of the partial-single formats PS(mu): sign bit, 8 exponent bits and mu
// explicit mantissa bits, stored in ordinary 32-bit floats. PS(23) is FP32, PS(10) is
// TF32 and PS(7) is BF16.

#include <cstddef>
#include <optional>
#include <span>

#include "lamp/selection_mask.hpp"
#include "lamp/tensor.hpp"

namespace lamp::fp {

class FpFormat {
public:
    static constexpr int kMinMantissaBits = 1;
    static constexpr int kMaxMantissaBits = 23;

    /// Throws ContractViolation unless 1 <= mantissa_bits <= 23.
    explicit FpFormat(int mantissa_bits);

    static FpFormat fp32() { return FpFormat(23); }
    static FpFormat tf32() { return FpFormat(10); }
    static FpFormat bf16() { return FpFormat(7); }

    int mantissa_bits() const noexcept { return mu_; }
    /// 2^-(mu+1).
    double unit_roundoff() const noexcept;

    bool operator==(const FpFormat&) const = default;

private:
    int mu_;
};

/// Accumulator format of a mixed-precision inner product. Inputs stay in FP32.
struct MixedDotSpec {
    FpFormat accumulate_format = FpFormat::fp32();
};

/// Round x to the nearest PS(fmt) value, ties to even. Exponent range, sign (including -0),
/// infinities and NaN are preserved; rounding past the largest finite value yields infinity.
float round_ps(float x, FpFormat fmt) noexcept;

/// Sequential FP32 dot product, left to right. The "recompute in full precision" path.
float plain_dot(std::span<const float> a, std::span<const float> b);

/// c <- round_ps(c + a_i * b_i) for i = 0..n-1, with the product and the sum each a separate
/// FP32 operation. Empty input returns +0.
float mixed_dot(std::span<const float> a, std::span<const float> b, const MixedDotSpec& spec);

/// C = A * B where every entry is a mixed_dot over a row of A and a column of B. Entries
/// flagged in `recompute` (row-major over C) use plain_dot instead.
Tensor2D mixed_matmul(const Tensor2D& a, const Tensor2D& b, const MixedDotSpec& spec,
                      const std::optional<SelectionMask>& recompute = std::nullopt);

/// Plain FP32 matmul with the same summation order as mixed_matmul.
Tensor2D plain_matmul(const Tensor2D& a, const Tensor2D& b);

}  // namespace lamp::fp
