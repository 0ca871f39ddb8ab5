// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "lamp/fp_sim.hpp"
#include "lamp/random.hpp"
#include "oracles.hpp"

using lamp::CounterRng;
using lamp::Tensor2D;
using namespace lamp::fp;
using lamp::testing::reference_round;
using lamp::testing::same_bits;

namespace {

float random_float(CounterRng& rng) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(rng.next()));
}

// Finite floats spread over many binades, both signs.
float random_finite(CounterRng& rng) {
    float x;
    do {
        x = random_float(rng);
    } while (!std::isfinite(x));
    return x;
}

std::vector<float> random_vector(CounterRng& rng, std::size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    return v;
}

Tensor2D random_matrix(CounterRng& rng, std::size_t r, std::size_t c) {
    return Tensor2D(r, c, random_vector(rng, r * c));
}

}  // namespace

TEST(FpFormat, RejectsOutOfRangeMantissa) {
    EXPECT_THROW(FpFormat(0), lamp::ContractViolation);
    EXPECT_THROW(FpFormat(24), lamp::ContractViolation);
    EXPECT_EQ(FpFormat::tf32().mantissa_bits(), 10);
    EXPECT_EQ(FpFormat::bf16().mantissa_bits(), 7);
    EXPECT_DOUBLE_EQ(FpFormat(7).unit_roundoff(), std::ldexp(1.0, -8));
}

TEST(RoundPs, IdentityAtFullWidth) {
    CounterRng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const float x = random_finite(rng);
        EXPECT_TRUE(same_bits(round_ps(x, FpFormat(23)), x));
    }
}

TEST(RoundPs, KnownValues) {
    const FpFormat bf16(7);
    EXPECT_TRUE(same_bits(round_ps(-0.0f, bf16), -0.0f));
    EXPECT_EQ(round_ps(1.0f + std::ldexp(1.0f, -8), bf16), 1.0f);
    EXPECT_EQ(round_ps(1.0f + 3.0f * std::ldexp(1.0f, -9), bf16), 1.0f + std::ldexp(1.0f, -7));
    // Tie with an odd lower neighbour rounds up to the even one.
    const float odd = 1.0f + std::ldexp(1.0f, -7);
    EXPECT_EQ(round_ps(odd + std::ldexp(1.0f, -8), bf16), 1.0f + std::ldexp(1.0f, -6));
}

TEST(RoundPs, SpecialValuesPassThrough) {
    const float inf = std::numeric_limits<float>::infinity();
    const float nan = std::numeric_limits<float>::quiet_NaN();
    for (int mu = 1; mu <= 23; ++mu) {
        EXPECT_EQ(round_ps(inf, FpFormat(mu)), inf);
        EXPECT_EQ(round_ps(-inf, FpFormat(mu)), -inf);
        EXPECT_TRUE(same_bits(round_ps(nan, FpFormat(mu)), nan));
        EXPECT_TRUE(same_bits(round_ps(0.0f, FpFormat(mu)), 0.0f));
    }
}

TEST(RoundPs, OverflowsToInfinityAtTopOfRange) {
    const float max = std::numeric_limits<float>::max();
    EXPECT_EQ(round_ps(max, FpFormat(7)), std::numeric_limits<float>::infinity());
    EXPECT_EQ(round_ps(-max, FpFormat(7)), -std::numeric_limits<float>::infinity());
}

TEST(RoundPs, SubnormalsRoundOnTheirOwnGrid) {
    const float denorm_min = std::numeric_limits<float>::denorm_min();
    // Smallest subnormal with mu = 1 rounds to zero (it is below half of 2^-148).
    EXPECT_TRUE(same_bits(round_ps(denorm_min, FpFormat(1)), 0.0f));
    EXPECT_TRUE(same_bits(round_ps(-denorm_min, FpFormat(1)), -0.0f));
    // Largest subnormal rounds up into the smallest normal.
    const float largest_sub = std::bit_cast<float>(0x007FFFFFu);
    EXPECT_EQ(round_ps(largest_sub, FpFormat(10)), std::numeric_limits<float>::min());
}

TEST(RoundPs, MatchesReferenceRounderOnRandomPatterns) {
    CounterRng rng(2);
    for (int i = 0; i < 200000; ++i) {
        const float x = random_float(rng);
        const int mu = 1 + static_cast<int>(rng.below(23));
        const float got = round_ps(x, FpFormat(mu));
        if (std::isnan(x)) {
            ASSERT_TRUE(same_bits(got, x));
        } else {
            ASSERT_TRUE(same_bits(got, reference_round(x, mu)))
                << "x=" << x << " mu=" << mu << " got=" << got;
        }
    }
}

// Property: idempotence, monotonicity, nesting (a coarser grid is a subset of a finer one),
// and the unit round-off bound.
TEST(RoundPs, Properties) {
    CounterRng rng(3);
    for (int i = 0; i < 100000; ++i) {
        float x = random_finite(rng);
        float y = random_finite(rng);
        if (x > y) std::swap(x, y);
        const int mu1 = 1 + static_cast<int>(rng.below(23));
        const int mu2 = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(mu1)));
        const FpFormat f1(mu1), f2(mu2);

        const float rx = round_ps(x, f1);
        ASSERT_TRUE(same_bits(round_ps(rx, f1), rx));
        ASSERT_LE(rx, round_ps(y, f1));
        const float coarse = round_ps(x, f2);
        ASSERT_TRUE(same_bits(round_ps(coarse, f1), coarse));

        if (std::isnormal(x) && std::isfinite(rx)) {
            const double bound = std::ldexp(1.0, -(mu1 + 1)) *
                                 std::ldexp(1.0, static_cast<int>(std::floor(std::log2(std::abs(x)))));
            ASSERT_LE(std::abs(static_cast<double>(rx) - x), bound);
        }
    }
}

TEST(MixedDot, KnownValues) {
    const MixedDotSpec bf16{FpFormat(7)};
    const std::vector<float> a{1.5f}, b{2.0f};
    EXPECT_EQ(mixed_dot(a, b, bf16), 3.0f);

    const std::vector<float> c{1.0f, std::ldexp(1.0f, -10)}, d{1.0f, 1.0f};
    EXPECT_EQ(mixed_dot(c, d, bf16), 1.0f);
    EXPECT_EQ(plain_dot(c, d), 1.0f + std::ldexp(1.0f, -10));
}

TEST(MixedDot, EmptyIsPositiveZero) {
    const std::vector<float> empty;
    EXPECT_TRUE(same_bits(mixed_dot(empty, empty, MixedDotSpec{FpFormat(4)}), 0.0f));
}

TEST(MixedDot, LengthMismatchThrows) {
    const std::vector<float> a{1.0f, 2.0f}, b{1.0f};
    EXPECT_THROW(mixed_dot(a, b, MixedDotSpec{}), lamp::ContractViolation);
    EXPECT_THROW(plain_dot(a, b), lamp::ContractViolation);
}

TEST(MixedDot, FullWidthIsPlainDotBitwise) {
    CounterRng rng(4);
    const MixedDotSpec fp32{FpFormat(23)};
    for (int i = 0; i < 100000; ++i) {
        const std::size_t n = 1 + rng.below(32);
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        // Independent sequential loop.
        float expected = 0.0f;
        for (std::size_t k = 0; k < n; ++k) {
            volatile float p = a[k] * b[k];
            expected = expected + p;
        }
        ASSERT_TRUE(same_bits(mixed_dot(a, b, fp32), expected));
    }
}

TEST(MixedDot, StepwiseRoundingMatchesReference) {
    CounterRng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const int mu = 1 + static_cast<int>(rng.below(23));
        const std::size_t n = 1 + rng.below(24);
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        float c = 0.0f;
        for (std::size_t k = 0; k < n; ++k) {
            volatile float p = a[k] * b[k];
            volatile float s = c + p;
            c = reference_round(s, mu);
        }
        ASSERT_TRUE(same_bits(mixed_dot(a, b, MixedDotSpec{FpFormat(mu)}), c));
    }
}

TEST(MixedMatmul, FullMaskOrFullWidthEqualsPlain) {
    CounterRng rng(6);
    const auto a = random_matrix(rng, 5, 7);
    const auto b = random_matrix(rng, 7, 4);
    const auto plain = plain_matmul(a, b);

    EXPECT_EQ(mixed_matmul(a, b, MixedDotSpec{FpFormat(3)}, lamp::SelectionMask::ones(20)), plain);
    EXPECT_EQ(mixed_matmul(a, b, MixedDotSpec{FpFormat(23)}, lamp::SelectionMask::zeros(20)), plain);
    EXPECT_EQ(mixed_matmul(a, b, MixedDotSpec{FpFormat(23)}), plain);
}

TEST(MixedMatmul, MaskSelectsRecomputedEntries) {
    CounterRng rng(7);
    const auto a = random_matrix(rng, 3, 3);
    const auto b = random_matrix(rng, 3, 3);
    lamp::SelectionMask mask = lamp::SelectionMask::zeros(9);
    mask.set(0);
    const MixedDotSpec spec{FpFormat(7)};
    const auto c = mixed_matmul(a, b, spec, mask);

    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const std::vector<float> col{b(0, j), b(1, j), b(2, j)};
            const float expected = (i == 0 && j == 0) ? plain_dot(a.row(i), col)
                                                      : mixed_dot(a.row(i), col, spec);
            EXPECT_TRUE(same_bits(c(i, j), expected)) << i << "," << j;
        }
    }
}

TEST(MixedMatmul, ShapeErrors) {
    const Tensor2D a(2, 3), b(4, 2);
    EXPECT_THROW(mixed_matmul(a, b, MixedDotSpec{}), lamp::ContractViolation);
    const Tensor2D b_ok(3, 2);
    EXPECT_THROW(mixed_matmul(a, b_ok, MixedDotSpec{}, lamp::SelectionMask::zeros(3)),
                 lamp::ContractViolation);
}
