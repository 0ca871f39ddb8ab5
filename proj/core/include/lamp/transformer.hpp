// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// GPT-2 style decoder (pre-normalization, tied output head) whose key-query score
// accumulation can run in a simulated low-precision format, with look-ahead selection of
// the scores that are recomputed in FP32. Everything else runs in plain FP32.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lamp/fp_sim.hpp"
#include "lamp/selection.hpp"
#include "lamp/tensor.hpp"

namespace lamp::model {

struct ModelConfig {
    std::size_t n_layers = 0;
    std::size_t n_heads = 0;
    std::size_t d_model = 0;
    std::size_t vocab_size = 0;
    std::size_t max_positions = 0;

    std::size_t d_head() const { return n_heads == 0 ? 0 : d_model / n_heads; }
    std::size_t d_mlp() const { return 4 * d_model; }

    /// Throws ContractViolation on zero sizes or d_model not divisible by n_heads.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
    std::vector<float> ln1_gamma, ln1_beta;
    Tensor2D attn_w;  // [d_model x 3 d_model], columns q | k | v
    std::vector<float> attn_b;
    Tensor2D proj_w;  // [d_model x d_model]
    std::vector<float> proj_b;
    std::vector<float> ln2_gamma, ln2_beta;
    Tensor2D fc_w;  // [d_model x 4 d_model]
    std::vector<float> fc_b;
    Tensor2D out_w;  // [4 d_model x d_model]
    std::vector<float> out_b;

    bool operator==(const LayerWeights&) const = default;
};

struct ModelWeights {
    Tensor2D token_embedding;     // [vocab x d_model], also the output head
    Tensor2D position_embedding;  // [max_positions x d_model]
    std::vector<LayerWeights> layers;
    std::vector<float> lnf_gamma, lnf_beta;

    /// Throws ContractViolation if any shape disagrees with `config` or a value is not finite.
    void validate(const ModelConfig& config) const;

    bool operator==(const ModelWeights&) const = default;
};

struct Model {
    ModelConfig config;
    ModelWeights weights;
};

enum class AttentionMode { lamp, random_budget, off };

const char* to_string(AttentionMode mode);
/// Accepts "lamp", "random", "random-budget", "off". Throws ContractViolation otherwise.
AttentionMode parse_attention_mode(const std::string& text);

struct AttentionPrecisionPolicy {
    fp::FpFormat score_format = fp::FpFormat::fp32();
    select::LampThreshold tau{2.0};
    AttentionMode mode = AttentionMode::off;
    std::uint64_t rng_seed = 0;
};

struct AttentionStats {
    std::uint64_t recomputed_count = 0;
    std::uint64_t causal_pair_count = 0;

    AttentionStats& operator+=(const AttentionStats& other) {
        recomputed_count += other.recomputed_count;
        causal_pair_count += other.causal_pair_count;
        return *this;
    }
    bool operator==(const AttentionStats&) const = default;
};

/// Identifies one softmax row; keys the random-budget generator.
struct RowKey {
    std::size_t layer = 0;
    std::size_t head = 0;
    std::size_t row = 0;
};

struct AttentionRow {
    std::vector<float> probabilities;
    std::size_t recomputed_count = 0;
};

/// Attention weights of one query over keys.row(0..t-1):
///   1. scores by mixed_dot in policy.score_format, then scaled in FP32;
///   2. z = softmax(scores);
///   3. LAMP selection on z (or a random subset of the same size in random-budget mode);
///   4. selected scores recomputed with plain FP32 dots;
///   5. softmax of the updated scores.
AttentionRow lamp_attention_row(std::span<const float> query, const Tensor2D& keys, std::size_t t,
                                const AttentionPrecisionPolicy& policy, float scale,
                                const RowKey& key = {});

struct ForwardResult {
    Tensor2D logits;  // [len x vocab]
    AttentionStats stats;
};

/// Throws InputError for out-of-vocabulary tokens or sequences longer than max_positions.
ForwardResult forward(const ModelWeights& weights, const ModelConfig& config,
                      std::span<const std::uint32_t> tokens,
                      const AttentionPrecisionPolicy& policy);

/// Uniform FP32 inference. Key-query scores use plain_dot directly rather than going through
/// the PS(23) path, so equality with forward(off, mu = 23) is a real check.
Tensor2D reference_forward(const ModelWeights& weights, const ModelConfig& config,
                           std::span<const std::uint32_t> tokens);

}  // namespace lamp::model
