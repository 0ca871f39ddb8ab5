// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lamp/tensor.hpp"

namespace lamp::kernels {

inline constexpr float kLayerNormEps = 1e-5f;

/// Max-stabilized softmax over y[0, valid_len); entries at and beyond valid_len are treated
/// as -inf and come out exactly 0. Exponentials are FP32, the normalizer is accumulated in
/// double. Throws ContractViolation if valid_len is 0 or exceeds y.size().
std::vector<float> softmax_row(std::span<const float> y, std::size_t valid_len);
void softmax_row(std::span<const float> y, std::size_t valid_len, std::span<float> out);

/// sqrt(n) * y / ||y||_2. Throws SingularInput for a zero vector.
std::vector<float> rmsnorm(std::span<const float> y);

std::vector<float> layernorm(std::span<const float> y, std::span<const float> gamma,
                             std::span<const float> beta, float eps = kLayerNormEps);
/// Row-wise layernorm of a [tokens x d] activation.
Tensor2D layernorm_rows(const Tensor2D& x, std::span<const float> gamma,
                        std::span<const float> beta, float eps = kLayerNormEps);

float gelu(float y);
std::vector<float> gelu(std::span<const float> y);
void gelu_inplace(Tensor2D& x);

/// x [t x in] * w [in x out] + bias [out], every output summed over `in` left to right.
Tensor2D linear(const Tensor2D& x, const Tensor2D& w, std::span<const float> bias);

}  // namespace lamp::kernels
