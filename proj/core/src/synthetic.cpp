// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/synthetic.hpp"

#include <cmath>

#include "lamp/random.hpp"

namespace lamp::synthetic {

namespace {

class Filler {
public:
    explicit Filler(std::uint64_t seed) : rng_(hash_key({seed, 0x7779u})) {}

    std::vector<float> normal(std::size_t n, float mean, float std) {
        std::vector<float> v(n);
        for (auto& x : v) x = mean + std * static_cast<float>(rng_.normal());
        return v;
    }
    float scalar(float std) { return std * static_cast<float>(rng_.normal()); }
    Tensor2D matrix(std::size_t rows, std::size_t cols, float std) {
        return Tensor2D(rows, cols, normal(rows * cols, 0.0f, std));
    }

private:
    CounterRng rng_;
};

}  // namespace

model::Model make_tiny_model(const TinyModelOptions& o) {
    model::Model m;
    m.config = {o.n_layers, o.n_heads, o.d_model, o.vocab_size, o.max_positions};
    m.config.validate();

    const std::size_t d = o.d_model;
    const float width_std = 1.0f / std::sqrt(static_cast<float>(d));
    Filler f(o.seed);

    auto& w = m.weights;
    w.token_embedding = f.matrix(o.vocab_size, d, o.embedding_std);
    w.position_embedding = f.matrix(o.max_positions, d, 0.5f * o.embedding_std);
    for (std::size_t l = 0; l < o.n_layers; ++l) {
        model::LayerWeights L;
        L.ln1_gamma = f.normal(d, 1.0f, 0.1f);
        L.ln1_beta = f.normal(d, 0.0f, 0.05f);
        L.attn_w = Tensor2D(d, 3 * d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < 3 * d; ++c) {
                const float std = c < 2 * d ? o.qk_std : width_std;
                L.attn_w(r, c) = f.scalar(std);
            }
        }
        L.attn_b = f.normal(3 * d, 0.0f, 0.02f);
        L.proj_w = f.matrix(d, d, width_std);
        L.proj_b = f.normal(d, 0.0f, 0.02f);
        L.ln2_gamma = f.normal(d, 1.0f, 0.1f);
        L.ln2_beta = f.normal(d, 0.0f, 0.05f);
        L.fc_w = f.matrix(d, 4 * d, width_std);
        L.fc_b = f.normal(4 * d, 0.0f, 0.02f);
        L.out_w = f.matrix(4 * d, d, 0.5f * width_std);
        L.out_b = f.normal(d, 0.0f, 0.02f);
        w.layers.push_back(std::move(L));
    }
    w.lnf_gamma = f.normal(d, 1.0f, 0.1f);
    w.lnf_beta = f.normal(d, 0.0f, 0.05f);
    w.validate(m.config);
    return m;
}

io::Dataset make_random_dataset(std::uint64_t seed, std::size_t count, std::size_t length,
                                std::size_t vocab_size) {
    if (vocab_size == 0) throw ContractViolation("make_random_dataset: empty vocabulary");
    io::Dataset out(count);
    for (std::size_t s = 0; s < count; ++s) {
        CounterRng rng(hash_key({seed, 0x5e9u, s}));
        out[s].resize(length);
        for (auto& id : out[s]) id = static_cast<std::uint32_t>(rng.below(vocab_size));
    }
    return out;
}

}  // namespace lamp::synthetic
