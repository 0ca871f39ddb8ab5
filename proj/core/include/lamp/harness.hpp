// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lamp/formats.hpp"
#include "lamp/transformer.hpp"

namespace lamp::harness {

struct ExperimentConfig {
    std::string weights_path;
    std::string dataset_path;
    std::size_t sequence_count = 20;
    std::size_t sequence_length = 256;
    std::vector<int> mu_list{2, 4, 7, 10};
    std::vector<double> tau_list{1.02, 1.1, 1.4, 2.0};
    model::AttentionMode mode = model::AttentionMode::lamp;
    bool shuffle_tokens = false;
    std::uint64_t seed = 0;
    std::string output_path;  // empty: no CSV file
    std::size_t threads = 1;
    /// Record wall_time_seconds. Off by default so the CSV is reproducible byte for byte.
    bool timing = false;

    /// Parses the JSON config format (same keys as the fields above; "mode" is a string).
    /// Throws ValidationError on malformed JSON, unknown keys or wrong types.
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Checks that do not need the model or dataset. Throws ValidationError.
    void validate() const;
};

struct ResultRow {
    std::string model_id;
    std::string dataset_id;
    int mu = 23;
    double tau = 2.0;
    model::AttentionMode mode = model::AttentionMode::off;
    double mean_kl = 0.0;
    double flip_rate = 0.0;
    double recomputation_rate = 0.0;
    double effective_mantissa_bits = 0.0;
    std::size_t positions = 0;
    double wall_time_seconds = 0.0;
};

std::string csv_header();
std::string csv_line(const ResultRow& row);

/// Independently permutes every sequence with a generator keyed by (seed, sequence index).
io::Dataset shuffle_sequences(io::Dataset dataset, std::uint64_t seed);

/// Runs `body(i)` for i in [0, n) on up to `threads` workers. Rethrows the first exception.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& body);

/// Loads weights and dataset from the config paths, then sweeps. File problems surface as
/// IoError / FormatError, config problems as ValidationError before any compute.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

/// In-memory sweep: reference logits once per sequence, then one row per (mu, tau) cell in
/// mu-major order. Rows are appended to config.output_path as they complete.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const model::Model& model,
                                 const io::Dataset& dataset, const std::string& model_id,
                                 const std::string& dataset_id);

}  // namespace lamp::harness

#include "lamp/detail/parallel.hpp"
