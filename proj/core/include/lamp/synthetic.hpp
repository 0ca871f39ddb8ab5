// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "lamp/formats.hpp"
#include "lamp/transformer.hpp"

namespace lamp::synthetic {

/// Seeded random GPT-2 style model small enough for unit tests and desk-scale sweeps.
struct TinyModelOptions {
    std::uint64_t seed = 0;
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t d_model = 32;
    std::size_t vocab_size = 64;
    std::size_t max_positions = 256;
    /// Standard deviation of the query/key projection weights. Large enough that attention
    /// rows are peaked rather than near-uniform, as in trained models.
    float qk_std = 0.45f;
    float embedding_std = 0.5f;
};

model::Model make_tiny_model(const TinyModelOptions& options = {});

/// `count` sequences of `length` token ids drawn uniformly from [0, vocab_size).
io::Dataset make_random_dataset(std::uint64_t seed, std::size_t count, std::size_t length,
                                std::size_t vocab_size);

}  // namespace lamp::synthetic
