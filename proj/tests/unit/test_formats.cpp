// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "lamp/formats.hpp"
#include "lamp/random.hpp"
#include "lamp/synthetic.hpp"

using namespace lamp::io;
using lamp::CounterRng;

namespace {

std::vector<NamedTensor> random_tensors(CounterRng& rng) {
    std::vector<NamedTensor> out;
    const std::size_t count = rng.below(6);
    for (std::size_t t = 0; t < count; ++t) {
        NamedTensor nt;
        nt.name = "t" + std::to_string(t) + ".x";
        const std::size_t rank = rng.below(4);
        std::size_t total = 1;
        for (std::size_t r = 0; r < rank; ++r) {
            nt.dims.push_back(rng.below(5));
            total *= nt.dims.back();
        }
        for (std::size_t i = 0; i < total; ++i) nt.values.push_back(static_cast<float>(rng.normal()));
        out.push_back(std::move(nt));
    }
    return out;
}

std::size_t error_offset(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_weights(bytes);
    } catch (const lamp::FormatError& e) {
        return e.offset();
    }
    ADD_FAILURE() << "expected FormatError";
    return 0;
}

}  // namespace

TEST(Weights, RoundTrip) {
    CounterRng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const auto tensors = random_tensors(rng);
        const auto bytes = encode_weights(tensors);
        ASSERT_EQ(decode_weights(bytes), tensors);
        ASSERT_EQ(encode_weights(decode_weights(bytes)), bytes);
    }
}

TEST(Weights, LayoutIsLittleEndian) {
    const std::vector<NamedTensor> one{{"ab", {2}, {1.0f, -2.0f}}};
    const auto bytes = encode_weights(one);
    // magic 7, count 4, name len 2, name 2, rank 1, dim 8, payload 8
    ASSERT_EQ(bytes.size(), 7u + 4 + 2 + 2 + 1 + 8 + 8);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "LAMPW01");
    EXPECT_EQ(bytes[7], 1);
    EXPECT_EQ(bytes[11], 2);
    EXPECT_EQ(bytes[15], 1);
    EXPECT_EQ(bytes[16], 2);
    float f = 0;
    std::memcpy(&f, bytes.data() + 24, 4);
    EXPECT_EQ(f, 1.0f);
}

TEST(Weights, ErrorOffsets) {
    const std::vector<NamedTensor> one{{"w", {3}, {1.0f, 2.0f, 3.0f}}};
    auto bytes = encode_weights(one);

    auto bad_magic = bytes;
    bad_magic[3] = 'X';
    EXPECT_EQ(error_offset(bad_magic), 0u);

    // Truncated payload: parse stops at the start of the f32 block.
    auto truncated = bytes;
    truncated.resize(bytes.size() - 2);
    EXPECT_EQ(error_offset(truncated), 7u + 4 + 2 + 1 + 1 + 8);

    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_EQ(error_offset(trailing), bytes.size());

    const std::vector<NamedTensor> dup{{"w", {1}, {1.0f}}, {"w", {1}, {2.0f}}};
    const auto dup_bytes = encode_weights(dup);
    EXPECT_EQ(error_offset(dup_bytes), 7u + 4 + (2 + 1 + 1 + 8 + 4));

    EXPECT_EQ(error_offset({}), 0u);
}

TEST(Weights, OversizedDimsRejected) {
    std::vector<std::uint8_t> bytes{'L', 'A', 'M', 'P', 'W', '0', '1', 1, 0, 0, 0, 1, 0, 'w', 2};
    for (int d = 0; d < 2; ++d) {
        for (int i = 0; i < 8; ++i) bytes.push_back(0xFF);
    }
    EXPECT_THROW(decode_weights(bytes), lamp::FormatError);
}

TEST(Tokens, RoundTripAndErrors) {
    const Dataset data{{1, 2, 3}, {}, {4294967295u}};
    const auto bytes = encode_tokens(data);
    EXPECT_EQ(decode_tokens(bytes), data);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "LAMPT01");

    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW(decode_tokens(truncated), lamp::FormatError);
    auto magic = bytes;
    magic[6] = '2';
    try {
        decode_tokens(magic);
        FAIL();
    } catch (const lamp::FormatError& e) {
        EXPECT_EQ(e.offset(), 0u);
    }
}

TEST(ModelTensors, RoundTripThroughFile) {
    const auto model = lamp::synthetic::make_tiny_model({.seed = 3, .max_positions = 16});
    const auto path = std::filesystem::temp_directory_path() / "lamp_test_model.lampw";
    save_model(path, model);
    const auto loaded = load_model(path);
    EXPECT_EQ(loaded.config, model.config);
    EXPECT_TRUE(loaded.weights == model.weights);
    std::filesystem::remove(path);
}

TEST(ModelTensors, MissingTensorIsNamed) {
    const auto model = lamp::synthetic::make_tiny_model({.seed = 3, .max_positions = 16});
    auto tensors = model_to_tensors(model);
    std::erase_if(tensors, [](const NamedTensor& t) { return t.name == "h.1.mlp.c_fc.b"; });
    try {
        model_from_tensors(tensors, 99);
        FAIL();
    } catch (const lamp::FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("h.1.mlp.c_fc.b"), std::string::npos) << e.what();
        EXPECT_EQ(e.offset(), 99u);
    }
}

TEST(Files, MissingFileIsIoError) {
    EXPECT_THROW(read_file("/nonexistent/lamp/file.bin"), lamp::IoError);
    EXPECT_THROW(load_dataset("/nonexistent/lamp/file.lampt"), lamp::IoError);
}
