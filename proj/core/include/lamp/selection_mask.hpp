// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lamp {

/// Binary vector q; q[i] set means component i is recomputed in high precision.
class SelectionMask {
public:
    SelectionMask() = default;
    explicit SelectionMask(std::size_t n, bool value = false) : flags_(n, value ? 1 : 0) {}
    explicit SelectionMask(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {
        for (auto& f : flags_) f = f ? 1 : 0;
    }

    static SelectionMask zeros(std::size_t n) { return SelectionMask(n, false); }
    static SelectionMask ones(std::size_t n) { return SelectionMask(n, true); }

    std::size_t size() const noexcept { return flags_.size(); }
    bool operator[](std::size_t i) const { return flags_[i] != 0; }
    void set(std::size_t i, bool value = true) { flags_[i] = value ? 1 : 0; }

    /// ||q||_0, the size of the support.
    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto f : flags_) c += f;
        return c;
    }

    /// Indices of the support in ascending order.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < flags_.size(); ++i) {
            if (flags_[i]) out.push_back(i);
        }
        return out;
    }

    const std::vector<std::uint8_t>& flags() const noexcept { return flags_; }

    bool operator==(const SelectionMask&) const = default;

private:
    std::vector<std::uint8_t> flags_;
};

}  // namespace lamp
