// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/transformer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lamp/kernels.hpp"
#include "lamp/random.hpp"

namespace lamp::model {

namespace {

void expect(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation("model weights: " + what);
}

void expect_shape(const Tensor2D& t, std::size_t rows, std::size_t cols, const std::string& name) {
    expect(t.rows == rows && t.cols == cols && t.data.size() == rows * cols,
           name + " has shape [" + std::to_string(t.rows) + " x " + std::to_string(t.cols) +
               "], expected [" + std::to_string(rows) + " x " + std::to_string(cols) + "]");
}

void expect_length(const std::vector<float>& v, std::size_t n, const std::string& name) {
    expect(v.size() == n, name + " has length " + std::to_string(v.size()) + ", expected " +
                              std::to_string(n));
}

bool all_finite(std::span<const float> v) {
    for (float x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

enum class ScorePath { policy, reference };

// Columns [offset, offset + width) of a [len x 3d] projection, as a [len x width] tensor.
Tensor2D slice_columns(const Tensor2D& x, std::size_t offset, std::size_t width) {
    Tensor2D out(x.rows, width);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto src = x.row(r);
        std::copy(src.begin() + static_cast<std::ptrdiff_t>(offset),
                  src.begin() + static_cast<std::ptrdiff_t>(offset + width), out.row(r).begin());
    }
    return out;
}

void choose_random_subset(std::size_t t, std::size_t count, std::uint64_t seed, const RowKey& key,
                          SelectionMask& mask) {
    CounterRng rng(hash_key({seed, key.layer, key.head, key.row}));
    std::vector<std::size_t> idx(t);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    mask = SelectionMask::zeros(t);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(t - i));
        std::swap(idx[i], idx[j]);
        mask.set(idx[i]);
    }
}

AttentionRow attention_row(std::span<const float> query, const Tensor2D& keys, std::size_t t,
                           const AttentionPrecisionPolicy& policy, float scale, const RowKey& key,
                           ScorePath path) {
    if (t == 0 || t > keys.rows) throw ContractViolation("attention row: invalid key count");
    if (query.size() != keys.cols) throw ContractViolation("attention row: query/key width mismatch");

    std::vector<float> scores(t);
    const fp::MixedDotSpec spec{policy.score_format};
    for (std::size_t j = 0; j < t; ++j) {
        const float dot = path == ScorePath::reference ? fp::plain_dot(query, keys.row(j))
                                                       : fp::mixed_dot(query, keys.row(j), spec);
        scores[j] = dot * scale;
    }

    AttentionRow out;
    out.probabilities = kernels::softmax_row(scores, t);
    if (path == ScorePath::reference || policy.mode == AttentionMode::off || t == 1) return out;

    // The LAMP matrix is frozen at the baseline probabilities.
    const std::vector<double> z(out.probabilities.begin(), out.probabilities.end());
    SelectionMask mask = select::solve_lamp_greedy_softmax(z, policy.tau);
    const std::size_t count = mask.count();
    if (count == 0) return out;
    if (policy.mode == AttentionMode::random_budget) {
        choose_random_subset(t, count, policy.rng_seed, key, mask);
    }

    for (std::size_t j = 0; j < t; ++j) {
        if (mask[j]) scores[j] = fp::plain_dot(query, keys.row(j)) * scale;
    }
    out.probabilities = kernels::softmax_row(scores, t);
    out.recomputed_count = count;
    return out;
}

ForwardResult run_forward(const ModelWeights& w, const ModelConfig& config,
                          std::span<const std::uint32_t> tokens,
                          const AttentionPrecisionPolicy& policy, ScorePath path) {
    const std::size_t len = tokens.size();
    if (len > config.max_positions) {
        throw InputError("forward: sequence length " + std::to_string(len) +
                         " exceeds max_positions " + std::to_string(config.max_positions));
    }
    for (std::size_t i = 0; i < len; ++i) {
        if (tokens[i] >= config.vocab_size) {
            throw InputError("forward: token id " + std::to_string(tokens[i]) + " at position " +
                             std::to_string(i) + " is outside the vocabulary of size " +
                             std::to_string(config.vocab_size));
        }
    }

    const std::size_t d = config.d_model;
    const std::size_t dh = config.d_head();
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

    Tensor2D x(len, d);
    for (std::size_t i = 0; i < len; ++i) {
        const auto te = w.token_embedding.row(tokens[i]);
        const auto pe = w.position_embedding.row(i);
        auto xi = x.row(i);
        for (std::size_t c = 0; c < d; ++c) xi[c] = te[c] + pe[c];
    }

    ForwardResult result;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const LayerWeights& layer = w.layers[l];
        const Tensor2D h = kernels::layernorm_rows(x, layer.ln1_gamma, layer.ln1_beta);
        const Tensor2D qkv = kernels::linear(h, layer.attn_w, layer.attn_b);

        Tensor2D context(len, d);
        for (std::size_t head = 0; head < config.n_heads; ++head) {
            const Tensor2D q = slice_columns(qkv, head * dh, dh);
            const Tensor2D k = slice_columns(qkv, d + head * dh, dh);
            const Tensor2D v = slice_columns(qkv, 2 * d + head * dh, dh);
            for (std::size_t i = 0; i < len; ++i) {
                const std::size_t t = i + 1;
                const AttentionRow row =
                    attention_row(q.row(i), k, t, policy, scale, RowKey{l, head, i}, path);
                result.stats.recomputed_count += row.recomputed_count;
                result.stats.causal_pair_count += t;

                auto out = context.row(i).subspan(head * dh, dh);
                for (std::size_t j = 0; j < t; ++j) {
                    const float p = row.probabilities[j];
                    const auto vj = v.row(j);
                    for (std::size_t c = 0; c < dh; ++c) out[c] = out[c] + p * vj[c];
                }
            }
        }

        const Tensor2D attn = kernels::linear(context, layer.proj_w, layer.proj_b);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = x.data[i] + attn.data[i];

        const Tensor2D h2 = kernels::layernorm_rows(x, layer.ln2_gamma, layer.ln2_beta);
        Tensor2D mlp = kernels::linear(h2, layer.fc_w, layer.fc_b);
        kernels::gelu_inplace(mlp);
        const Tensor2D mlp_out = kernels::linear(mlp, layer.out_w, layer.out_b);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = x.data[i] + mlp_out.data[i];
    }

    const Tensor2D hf = kernels::layernorm_rows(x, w.lnf_gamma, w.lnf_beta);
    result.logits = Tensor2D(len, config.vocab_size);
    for (std::size_t i = 0; i < len; ++i) {
        auto out = result.logits.row(i);
        for (std::size_t tok = 0; tok < config.vocab_size; ++tok) {
            out[tok] = fp::plain_dot(hf.row(i), w.token_embedding.row(tok));
        }
    }
    return result;
}

}  // namespace

void ModelConfig::validate() const {
    if (n_layers == 0 || n_heads == 0 || d_model == 0 || vocab_size == 0 || max_positions == 0) {
        throw ContractViolation("model config: all sizes must be positive");
    }
    if (d_model % n_heads != 0) {
        throw ContractViolation("model config: d_model " + std::to_string(d_model) +
                                " is not divisible by n_heads " + std::to_string(n_heads));
    }
}

void ModelWeights::validate(const ModelConfig& config) const {
    config.validate();
    const std::size_t d = config.d_model;
    expect_shape(token_embedding, config.vocab_size, d, "token embedding");
    expect_shape(position_embedding, config.max_positions, d, "position embedding");
    expect(layers.size() == config.n_layers, "layer count " + std::to_string(layers.size()) +
                                                 " does not match config " +
                                                 std::to_string(config.n_layers));
    expect_length(lnf_gamma, d, "final layernorm gamma");
    expect_length(lnf_beta, d, "final layernorm beta");
    expect(all_finite(token_embedding.data) && all_finite(position_embedding.data) &&
               all_finite(lnf_gamma) && all_finite(lnf_beta),
           "embedding or final layernorm contains non-finite values");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerWeights& L = layers[l];
        const std::string p = "layer " + std::to_string(l) + " ";
        expect_length(L.ln1_gamma, d, p + "ln1 gamma");
        expect_length(L.ln1_beta, d, p + "ln1 beta");
        expect_shape(L.attn_w, d, 3 * d, p + "attention qkv weight");
        expect_length(L.attn_b, 3 * d, p + "attention qkv bias");
        expect_shape(L.proj_w, d, d, p + "attention projection weight");
        expect_length(L.proj_b, d, p + "attention projection bias");
        expect_length(L.ln2_gamma, d, p + "ln2 gamma");
        expect_length(L.ln2_beta, d, p + "ln2 beta");
        expect_shape(L.fc_w, d, config.d_mlp(), p + "mlp fc weight");
        expect_length(L.fc_b, config.d_mlp(), p + "mlp fc bias");
        expect_shape(L.out_w, config.d_mlp(), d, p + "mlp output weight");
        expect_length(L.out_b, d, p + "mlp output bias");
        for (const auto* v : {&L.ln1_gamma, &L.ln1_beta, &L.attn_b, &L.proj_b, &L.ln2_gamma,
                              &L.ln2_beta, &L.fc_b, &L.out_b}) {
            expect(all_finite(*v), p + "contains non-finite values");
        }
        for (const auto* t : {&L.attn_w, &L.proj_w, &L.fc_w, &L.out_w}) {
            expect(all_finite(t->data), p + "contains non-finite values");
        }
    }
}

const char* to_string(AttentionMode mode) {
    switch (mode) {
        case AttentionMode::lamp: return "lamp";
        case AttentionMode::random_budget: return "random";
        case AttentionMode::off: return "off";
    }
    return "unknown";
}

AttentionMode parse_attention_mode(const std::string& text) {
    if (text == "lamp") return AttentionMode::lamp;
    if (text == "random" || text == "random-budget") return AttentionMode::random_budget;
    if (text == "off") return AttentionMode::off;
    throw ContractViolation("unknown attention mode '" + text + "' (expected lamp, random or off)");
}

AttentionRow lamp_attention_row(std::span<const float> query, const Tensor2D& keys, std::size_t t,
                                const AttentionPrecisionPolicy& policy, float scale,
                                const RowKey& key) {
    return attention_row(query, keys, t, policy, scale, key, ScorePath::policy);
}

ForwardResult forward(const ModelWeights& weights, const ModelConfig& config,
                      std::span<const std::uint32_t> tokens,
                      const AttentionPrecisionPolicy& policy) {
    return run_forward(weights, config, tokens, policy, ScorePath::policy);
}

Tensor2D reference_forward(const ModelWeights& weights, const ModelConfig& config,
                           std::span<const std::uint32_t> tokens) {
    return run_forward(weights, config, tokens, AttentionPrecisionPolicy{}, ScorePath::reference)
        .logits;
}

}  // namespace lamp::model
