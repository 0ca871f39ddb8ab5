// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lamp/errors.hpp"

namespace lamp {

/// Row-major 32-bit float matrix.
struct Tensor2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Tensor2D() = default;
    Tensor2D(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}
    Tensor2D(std::size_t r, std::size_t c, std::vector<float> values)
        : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != rows * cols) {
            throw ContractViolation("Tensor2D: data length does not match rows * cols");
        }
    }

    float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Tensor2D&) const = default;
};

}  // namespace lamp
