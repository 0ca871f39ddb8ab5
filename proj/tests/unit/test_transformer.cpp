// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "lamp/kernels.hpp"
#include "lamp/random.hpp"
#include "lamp/synthetic.hpp"
#include "lamp/transformer.hpp"

using namespace lamp::model;
using lamp::CounterRng;
using lamp::fp::FpFormat;
using lamp::select::LampThreshold;

namespace {

const lamp::model::Model& tiny() {
    static const auto m = lamp::synthetic::make_tiny_model({.seed = 7, .max_positions = 64});
    return m;
}

std::vector<std::uint32_t> tokens(std::uint64_t seed, std::size_t len) {
    return lamp::synthetic::make_random_dataset(seed, 1, len, tiny().config.vocab_size)[0];
}

AttentionPrecisionPolicy policy(int mu, double tau, AttentionMode mode, std::uint64_t seed = 0) {
    return {FpFormat(mu), LampThreshold(tau), mode, seed};
}

std::uint64_t fnv1a(const lamp::Tensor2D& t) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (float v : t.data) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) {
            h ^= (bits >> (8 * i)) & 0xFFu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

}  // namespace

TEST(Forward, OffAtFullWidthIsReference) {
    const auto seq = tokens(1, 48);
    const auto ref = reference_forward(tiny().weights, tiny().config, seq);
    const auto out = forward(tiny().weights, tiny().config, seq, policy(23, 2.0, AttentionMode::off));
    EXPECT_EQ(out.logits, ref);
    EXPECT_EQ(out.stats.recomputed_count, 0u);
    EXPECT_EQ(out.stats.causal_pair_count, 48u * 49u / 2u * 2u * 2u);  // layers x heads
}

TEST(Forward, FullRecomputationIsReferenceAtAnyWidth) {
    const auto seq = tokens(2, 40);
    const auto ref = reference_forward(tiny().weights, tiny().config, seq);
    for (int mu : {1, 4, 10}) {
        const auto out = forward(tiny().weights, tiny().config, seq, policy(mu, 0.0, AttentionMode::lamp));
        EXPECT_EQ(out.logits, ref) << mu;
        // The first row (a single key) is skipped, everything else is recomputed.
        const std::uint64_t per_head = 40u * 41u / 2u - 1u;
        EXPECT_EQ(out.stats.recomputed_count, per_head * 4u);
    }
}

TEST(Forward, SingleTokenIsExactForAnyPolicy) {
    const auto seq = tokens(3, 1);
    const auto ref = reference_forward(tiny().weights, tiny().config, seq);
    for (int mu : {1, 3, 7}) {
        for (auto mode : {AttentionMode::off, AttentionMode::lamp, AttentionMode::random_budget}) {
            EXPECT_EQ(forward(tiny().weights, tiny().config, seq, policy(mu, 1.1, mode)).logits, ref);
        }
    }
}

TEST(Forward, InputErrors) {
    std::vector<std::uint32_t> bad{1, 2, static_cast<std::uint32_t>(tiny().config.vocab_size)};
    EXPECT_THROW(forward(tiny().weights, tiny().config, bad, {}), lamp::InputError);
    EXPECT_THROW(reference_forward(tiny().weights, tiny().config, tokens(1, 65)), lamp::InputError);
}

TEST(Forward, DeterministicAndSeedSensitiveOnlyInRandomMode) {
    const auto seq = tokens(4, 32);
    const auto p = policy(4, 1.2, AttentionMode::lamp, 1);
    const auto a = forward(tiny().weights, tiny().config, seq, p);
    const auto b = forward(tiny().weights, tiny().config, seq, policy(4, 1.2, AttentionMode::lamp, 99));
    EXPECT_EQ(a.logits, b.logits);
    EXPECT_EQ(a.stats, b.stats);

    const auto r1 = forward(tiny().weights, tiny().config, seq, policy(4, 1.2, AttentionMode::random_budget, 1));
    const auto r2 = forward(tiny().weights, tiny().config, seq, policy(4, 1.2, AttentionMode::random_budget, 1));
    EXPECT_EQ(r1.logits, r2.logits);
}

TEST(Forward, BudgetShrinksAsThresholdGrows) {
    const auto seq = tokens(5, 48);
    std::uint64_t previous = ~std::uint64_t{0};
    for (double tau : {0.5, 1.02, 1.1, 1.4, 2.0}) {
        const auto out = forward(tiny().weights, tiny().config, seq, policy(4, tau, AttentionMode::lamp));
        EXPECT_LE(out.stats.recomputed_count, previous) << tau;
        previous = out.stats.recomputed_count;
    }
    EXPECT_EQ(previous, 0u);
}

// Golden snapshot of the tiny model's logits; pins weights generation and the forward pass.
TEST(Forward, GoldenSnapshot) {
    const auto seq = tokens(6, 16);
    const auto ref = reference_forward(tiny().weights, tiny().config, seq);
    const auto lamp4 = forward(tiny().weights, tiny().config, seq, policy(4, 1.2, AttentionMode::lamp));
    EXPECT_EQ(fnv1a(ref), 0x50ce6ba1fe7b2950ull) << std::hex << fnv1a(ref);
    EXPECT_EQ(fnv1a(lamp4.logits), 0x2c0f5203cf7a1d04ull) << std::hex << fnv1a(lamp4.logits);
}

TEST(AttentionRow, SingleKey) {
    const lamp::Tensor2D keys(1, 4, std::vector<float>{1, 2, 3, 4});
    const std::vector<float> q{0.5f, 0.5f, 0.5f, 0.5f};
    const auto row = lamp_attention_row(q, keys, 1, policy(2, 0.0, AttentionMode::lamp), 0.5f);
    EXPECT_EQ(row.probabilities, std::vector<float>{1.0f});
    EXPECT_EQ(row.recomputed_count, 0u);
}

TEST(AttentionRow, FullWidthRecomputationChangesNothing) {
    CounterRng rng(61);
    lamp::Tensor2D keys(12, 8);
    for (auto& v : keys.data) v = static_cast<float>(2.0 * rng.normal());
    std::vector<float> q(8);
    for (auto& v : q) v = static_cast<float>(rng.normal());
    const auto off = lamp_attention_row(q, keys, 12, policy(23, 1.1, AttentionMode::off), 0.35f);
    const auto on = lamp_attention_row(q, keys, 12, policy(23, 1.02, AttentionMode::lamp), 0.35f);
    EXPECT_EQ(on.probabilities, off.probabilities);
    EXPECT_GT(on.recomputed_count, 0u);
}

// Property: the budget is the greedy count on the baseline row, and random mode spends the same.
TEST(AttentionRow, BudgetMatchesGreedyOnBaseline) {
    CounterRng rng(62);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t t = 2 + rng.below(30);
        lamp::Tensor2D keys(t, 8);
        for (auto& v : keys.data) v = static_cast<float>(2.0 * rng.normal());
        std::vector<float> q(8);
        for (auto& v : q) v = static_cast<float>(rng.normal());
        const double tau = 1.0 + rng.uniform();
        const int mu = 1 + static_cast<int>(rng.below(10));

        const auto base = lamp_attention_row(q, keys, t, policy(mu, tau, AttentionMode::off), 0.35f);
        const std::vector<double> z(base.probabilities.begin(), base.probabilities.end());
        const std::size_t expected = lamp::select::solve_lamp_greedy_softmax(z, LampThreshold(tau)).count();

        const auto lamp_row = lamp_attention_row(q, keys, t, policy(mu, tau, AttentionMode::lamp), 0.35f);
        const auto rand_row = lamp_attention_row(q, keys, t, policy(mu, tau, AttentionMode::random_budget, 5),
                                                 0.35f, RowKey{0, 1, t});
        ASSERT_EQ(lamp_row.recomputed_count, expected);
        ASSERT_EQ(rand_row.recomputed_count, expected);
    }
}

TEST(AttentionRow, LampRecoversDominantKey) {
    // Two near-tied scores that a 2-bit accumulator collapses; recomputation separates them.
    CounterRng rng(63);
    int lamp_right = 0, off_right = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t t = 16;
        lamp::Tensor2D keys(t, 16);
        for (auto& v : keys.data) v = static_cast<float>(rng.normal());
        std::vector<float> q(16);
        for (auto& v : q) v = static_cast<float>(rng.normal());
        const auto ref = lamp_attention_row(q, keys, t, policy(23, 2.0, AttentionMode::off), 1.0f);
        const auto off = lamp_attention_row(q, keys, t, policy(2, 2.0, AttentionMode::off), 1.0f);
        const auto on = lamp_attention_row(q, keys, t, policy(2, 1.05, AttentionMode::lamp), 1.0f);
        auto err = [&](const std::vector<float>& p) {
            double e = 0;
            for (std::size_t j = 0; j < t; ++j) e = std::max(e, std::abs(static_cast<double>(p[j]) - ref.probabilities[j]));
            return e;
        };
        if (err(on.probabilities) < 0.1) ++lamp_right;
        if (err(off.probabilities) < 0.1) ++off_right;
    }
    EXPECT_GT(lamp_right, off_right);
    EXPECT_GE(lamp_right, 190);
}

TEST(AttentionRow, Errors) {
    const lamp::Tensor2D keys(2, 3);
    const std::vector<float> q(3);
    EXPECT_THROW(lamp_attention_row(q, keys, 0, {}, 1.0f), lamp::ContractViolation);
    EXPECT_THROW(lamp_attention_row(q, keys, 3, {}, 1.0f), lamp::ContractViolation);
    EXPECT_THROW(lamp_attention_row(std::vector<float>(2), keys, 2, {}, 1.0f), lamp::ContractViolation);
}

TEST(AttentionMode, Parsing) {
    EXPECT_EQ(parse_attention_mode("lamp"), AttentionMode::lamp);
    EXPECT_EQ(parse_attention_mode("random"), AttentionMode::random_budget);
    EXPECT_EQ(parse_attention_mode("random-budget"), AttentionMode::random_budget);
    EXPECT_EQ(parse_attention_mode("off"), AttentionMode::off);
    EXPECT_THROW(parse_attention_mode("on"), lamp::ContractViolation);
    EXPECT_STREQ(to_string(AttentionMode::random_budget), "random");
}

TEST(ModelConfig, Validation) {
    ModelConfig c{1, 3, 32, 10, 8};
    EXPECT_THROW(c.validate(), lamp::ContractViolation);
    c.n_heads = 4;
    EXPECT_NO_THROW(c.validate());
    auto w = tiny().weights;
    w.layers[0].fc_b.pop_back();
    EXPECT_THROW(w.validate(tiny().config), lamp::ContractViolation);
}
