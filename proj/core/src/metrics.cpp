// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lamp/kernels.hpp"

namespace lamp::metrics {

double kl_divergence(std::span<const float> p_ref, std::span<const float> p_test,
                     std::size_t* floor_hits) {
    if (p_ref.size() != p_test.size()) {
        throw ContractViolation("kl_divergence: distributions have different lengths");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p_ref.size(); ++i) {
        const double p = p_ref[i];
        if (p == 0.0) continue;
        double q = p_test[i];
        if (q < kProbabilityFloor) {
            q = kProbabilityFloor;
            if (floor_hits) ++*floor_hits;
        }
        kl += p * std::log(p / q);
    }
    return kl;
}

std::size_t argmax(std::span<const float> p) {
    if (p.empty()) throw ContractViolation("argmax: empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return best;
}

bool flip(std::span<const float> p_ref, std::span<const float> p_test) {
    if (p_ref.size() != p_test.size()) {
        throw ContractViolation("flip: distributions have different lengths");
    }
    return argmax(p_ref) != argmax(p_test);
}

double effective_mantissa_bits(int mu, double recomputation_rate) {
    return static_cast<double>(mu) + kFullMantissaBits * recomputation_rate;
}

RunMetrics aggregate(std::span<const PositionRecord> records, const model::AttentionStats& stats,
                     int mu) {
    if (records.empty()) throw ContractViolation("aggregate: no positions to aggregate");
    RunMetrics m;
    double kl_sum = 0.0;
    std::size_t flips = 0;
    for (const auto& r : records) {
        kl_sum += r.kl;
        flips += r.flipped ? 1 : 0;
    }
    m.positions_counted = records.size();
    m.mean_kl = kl_sum / static_cast<double>(records.size());
    m.flip_rate = static_cast<double>(flips) / static_cast<double>(records.size());
    m.recomputation_rate = stats.causal_pair_count == 0
                               ? 0.0
                               : static_cast<double>(stats.recomputed_count) /
                                     static_cast<double>(stats.causal_pair_count);
    m.effective_mantissa_bits = effective_mantissa_bits(mu, m.recomputation_rate);
    return m;
}

Tensor2D probabilities(const Tensor2D& logits) {
    Tensor2D p(logits.rows, logits.cols);
    if (logits.cols == 0) return p;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        kernels::softmax_row(logits.row(r), logits.cols, p.row(r));
    }
    return p;
}

std::vector<PositionRecord> compare_positions(const Tensor2D& p_ref, const Tensor2D& p_test,
                                              std::size_t* floor_hits) {
    if (p_ref.rows != p_test.rows || p_ref.cols != p_test.cols) {
        throw ContractViolation("compare_positions: probability tables differ in shape");
    }
    std::vector<PositionRecord> out(p_ref.rows);
    for (std::size_t r = 0; r < p_ref.rows; ++r) {
        out[r].kl = kl_divergence(p_ref.row(r), p_test.row(r), floor_hits);
        out[r].flipped = flip(p_ref.row(r), p_test.row(r));
    }
    return out;
}

}  // namespace lamp::metrics
