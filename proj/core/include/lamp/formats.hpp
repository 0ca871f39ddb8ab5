// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// On-disk formats. All integers and floats are little-endian.
//
// LAMPW01 (weights)
//   "LAMPW01"                      7 bytes
//   u32   tensor count
//   per tensor:
//     u16 name length, UTF-8 name
//     u8  rank, u64 dims[rank]
//     f32 payload[prod(dims)]
//
// LAMPT01 (token dataset)
//   "LAMPT01"                      7 bytes
//   u32   sequence count
//   per sequence: u32 length, u32 token ids[length]

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lamp/transformer.hpp"

namespace lamp::io {

inline constexpr std::string_view kWeightsMagic = "LAMPW01";
inline constexpr std::string_view kTokensMagic = "LAMPT01";

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<float> values;

    bool operator==(const NamedTensor&) const = default;
};

using Sequence = std::vector<std::uint32_t>;
using Dataset = std::vector<Sequence>;

std::vector<std::uint8_t> encode_weights(std::span<const NamedTensor> tensors);
/// Throws FormatError (with the byte offset) on bad magic, truncation, duplicate names,
/// oversized dims or trailing bytes.
std::vector<NamedTensor> decode_weights(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_tokens(const Dataset& dataset);
std::vector<std::uint8_t> encode_tokens(std::span<const Sequence> dataset);
Dataset decode_tokens(std::span<const std::uint8_t> bytes);

/// Tensor names used for a GPT-2 style model: "wte", "wpe", "ln_f.g", "ln_f.b",
/// "h.<l>.ln_1.g", "h.<l>.attn.c_attn.w", ..., and "meta.n_head" = [n_heads].
std::vector<NamedTensor> model_to_tensors(const model::Model& model);
/// Infers the config from the tensor shapes; throws FormatError naming missing or
/// mis-shaped tensors (offset = `end_offset`).
model::Model model_from_tensors(std::span<const NamedTensor> tensors, std::size_t end_offset = 0);

/// Throws IoError when the file cannot be opened or written.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

model::Model load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const model::Model& model);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace lamp::io
