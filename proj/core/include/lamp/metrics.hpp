// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lamp/tensor.hpp"
#include "lamp/transformer.hpp"

namespace lamp::metrics {

/// Test probabilities below this are raised to it inside the logarithm.
inline constexpr double kProbabilityFloor = 1e-30;
inline constexpr int kFullMantissaBits = 23;

/// KL(p_ref || p_test) in nats, accumulated in double in index order. Terms with
/// p_ref_i = 0 contribute nothing. If `floor_hits` is given it is incremented once per
/// floored p_test entry.
double kl_divergence(std::span<const float> p_ref, std::span<const float> p_test,
                     std::size_t* floor_hits = nullptr);

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax(std::span<const float> p);

/// True iff the two distributions disagree on their most probable index.
bool flip(std::span<const float> p_ref, std::span<const float> p_test);

struct PositionRecord {
    double kl = 0.0;
    bool flipped = false;
};

struct RunMetrics {
    double mean_kl = 0.0;
    double flip_rate = 0.0;
    double recomputation_rate = 0.0;
    double effective_mantissa_bits = 0.0;
    std::size_t positions_counted = 0;
};

/// mu + 23 * rate: the low-precision pass always runs, recomputations add full-width work.
double effective_mantissa_bits(int mu, double recomputation_rate);

/// Throws ContractViolation for an empty record list.
RunMetrics aggregate(std::span<const PositionRecord> records, const model::AttentionStats& stats,
                     int mu);

/// Row-wise softmax of [len x vocab] logits (FP32, as the model would emit them).
Tensor2D probabilities(const Tensor2D& logits);

/// Per-position KL and flip between two [len x vocab] probability tables.
std::vector<PositionRecord> compare_positions(const Tensor2D& p_ref, const Tensor2D& p_test,
                                              std::size_t* floor_hits = nullptr);

}  // namespace lamp::metrics
