// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lamp::kernels {

void softmax_row(std::span<const float> y, std::size_t valid_len, std::span<float> out) {
    if (valid_len == 0) throw ContractViolation("softmax_row: valid_len must be at least 1");
    if (valid_len > y.size()) throw ContractViolation("softmax_row: valid_len exceeds row length");
    if (out.size() != y.size()) throw ContractViolation("softmax_row: output length mismatch");

    float max_value = y[0];
    for (std::size_t i = 1; i < valid_len; ++i) max_value = std::max(max_value, y[i]);

    double total = 0.0;
    for (std::size_t i = 0; i < valid_len; ++i) {
        const float e = std::exp(y[i] - max_value);
        out[i] = e;
        total += e;
    }
    for (std::size_t i = 0; i < valid_len; ++i) {
        out[i] = static_cast<float>(static_cast<double>(out[i]) / total);
    }
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(valid_len), out.end(), 0.0f);
}

std::vector<float> softmax_row(std::span<const float> y, std::size_t valid_len) {
    std::vector<float> out(y.size());
    softmax_row(y, valid_len, out);
    return out;
}

std::vector<float> rmsnorm(std::span<const float> y) {
    double sq = 0.0;
    for (float v : y) sq += static_cast<double>(v) * v;
    if (!(sq > 0.0)) throw SingularInput("rmsnorm: input has zero norm");
    const double scale = std::sqrt(static_cast<double>(y.size())) / std::sqrt(sq);
    std::vector<float> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = static_cast<float>(y[i] * scale);
    return out;
}

namespace {

void layernorm_into(std::span<const float> y, std::span<const float> gamma,
                    std::span<const float> beta, float eps, std::span<float> out) {
    const std::size_t n = y.size();
    float mean = 0.0f;
    for (float v : y) mean += v;
    mean /= static_cast<float>(n);
    float var = 0.0f;
    for (float v : y) {
        const float d = v - mean;
        var += d * d;
    }
    var /= static_cast<float>(n);
    const float inv = 1.0f / std::sqrt(var + eps);
    for (std::size_t i = 0; i < n; ++i) out[i] = (y[i] - mean) * inv * gamma[i] + beta[i];
}

void check_affine(std::size_t n, std::span<const float> gamma, std::span<const float> beta) {
    if (gamma.size() != n || beta.size() != n) {
        throw ContractViolation("layernorm: gamma/beta length must match input (" +
                                std::to_string(n) + ")");
    }
}

}  // namespace

std::vector<float> layernorm(std::span<const float> y, std::span<const float> gamma,
                             std::span<const float> beta, float eps) {
    check_affine(y.size(), gamma, beta);
    if (y.empty()) return {};
    std::vector<float> out(y.size());
    layernorm_into(y, gamma, beta, eps, out);
    return out;
}

Tensor2D layernorm_rows(const Tensor2D& x, std::span<const float> gamma,
                        std::span<const float> beta, float eps) {
    check_affine(x.cols, gamma, beta);
    Tensor2D out(x.rows, x.cols);
    if (x.cols == 0) return out;
    for (std::size_t r = 0; r < x.rows; ++r) layernorm_into(x.row(r), gamma, beta, eps, out.row(r));
    return out;
}

float gelu(float y) {
    constexpr float kC = 0.7978845608028654f;  // sqrt(2 / pi)
    return 0.5f * y * (1.0f + std::tanh(kC * (y + 0.044715f * y * y * y)));
}

std::vector<float> gelu(std::span<const float> y) {
    std::vector<float> out(y.size());
    std::transform(y.begin(), y.end(), out.begin(), [](float v) { return gelu(v); });
    return out;
}

void gelu_inplace(Tensor2D& x) {
    for (float& v : x.data) v = gelu(v);
}

Tensor2D linear(const Tensor2D& x, const Tensor2D& w, std::span<const float> bias) {
    if (x.cols != w.rows) throw ContractViolation("linear: input width does not match weight rows");
    if (bias.size() != w.cols) throw ContractViolation("linear: bias length does not match output width");
    Tensor2D out(x.rows, w.cols);
    for (std::size_t t = 0; t < x.rows; ++t) {
        auto acc = out.row(t);
        const auto in = x.row(t);
        for (std::size_t k = 0; k < w.rows; ++k) {
            const float a = in[k];
            const auto wk = w.row(k);
            for (std::size_t j = 0; j < w.cols; ++j) acc[j] = acc[j] + a * wk[j];
        }
        for (std::size_t j = 0; j < w.cols; ++j) acc[j] = acc[j] + bias[j];
    }
    return out;
}

}  // namespace lamp::kernels
