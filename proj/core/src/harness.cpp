// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/harness.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "lamp/metrics.hpp"
#include "lamp/random.hpp"

namespace lamp::harness {

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field '") + key + "': " + e.what());
    }
}

void validate_against(const ExperimentConfig& cfg, const model::Model& m, const io::Dataset& data) {
    try {
        m.weights.validate(m.config);
    } catch (const ContractViolation& e) {
        throw ValidationError(e.what());
    }
    if (cfg.sequence_length > m.config.max_positions) {
        throw ValidationError(fmt::format("sequence_length {} exceeds the model's max_positions {}",
                                          cfg.sequence_length, m.config.max_positions));
    }
    if (data.size() < cfg.sequence_count) {
        throw ValidationError(fmt::format("dataset has {} sequences, sequence_count is {}",
                                          data.size(), cfg.sequence_count));
    }
    for (std::size_t s = 0; s < cfg.sequence_count; ++s) {
        if (data[s].size() < cfg.sequence_length) {
            throw ValidationError(fmt::format("sequence {} has {} tokens, sequence_length is {}", s,
                                              data[s].size(), cfg.sequence_length));
        }
        for (std::size_t i = 0; i < cfg.sequence_length; ++i) {
            if (data[s][i] >= m.config.vocab_size) {
                throw ValidationError(fmt::format(
                    "sequence {} position {}: token id {} is outside the vocabulary of size {}", s,
                    i, data[s][i], m.config.vocab_size));
            }
        }
    }
}

std::string format_double(double v) { return fmt::format("{}", v); }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");

    static const std::set<std::string> known = {
        "weights_path", "dataset_path", "sequence_count", "sequence_length",
        "mu_list",      "tau_list",     "mode",           "shuffle_tokens",
        "seed",         "output_path",  "threads",        "timing"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ValidationError("unknown config field '" + key + "'");
    }

    ExperimentConfig c;
    auto opt = [&](const char* key, auto& target) {
        if (j.contains(key)) target = field<std::decay_t<decltype(target)>>(j, key);
    };
    opt("weights_path", c.weights_path);
    opt("dataset_path", c.dataset_path);
    opt("sequence_count", c.sequence_count);
    opt("sequence_length", c.sequence_length);
    opt("mu_list", c.mu_list);
    opt("tau_list", c.tau_list);
    opt("shuffle_tokens", c.shuffle_tokens);
    opt("seed", c.seed);
    opt("output_path", c.output_path);
    opt("threads", c.threads);
    opt("timing", c.timing);
    if (j.contains("mode")) {
        try {
            c.mode = model::parse_attention_mode(field<std::string>(j, "mode"));
        } catch (const ContractViolation& e) {
            throw ValidationError(e.what());
        }
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return from_json(std::string(bytes.begin(), bytes.end()));
}

void ExperimentConfig::validate() const {
    if (sequence_count == 0) throw ValidationError("sequence_count must be positive");
    if (sequence_length == 0) throw ValidationError("sequence_length must be positive");
    if (mu_list.empty()) throw ValidationError("mu_list is empty");
    if (tau_list.empty()) throw ValidationError("tau_list is empty");
    for (int mu : mu_list) {
        if (mu < fp::FpFormat::kMinMantissaBits || mu > fp::FpFormat::kMaxMantissaBits) {
            throw ValidationError(fmt::format("mu_list entry {} is outside [1, 23]", mu));
        }
    }
    for (double tau : tau_list) {
        if (!(tau >= 0.0)) throw ValidationError(fmt::format("tau_list entry {} is negative", tau));
    }
    if (threads == 0) throw ValidationError("threads must be at least 1");
}

std::string csv_header() {
    return "model_id,dataset_id,mu,tau,mode,mean_kl,flip_rate,recomputation_rate,"
           "effective_mantissa_bits,positions,wall_time_seconds";
}

std::string csv_line(const ResultRow& r) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.model_id, r.dataset_id, r.mu,
                       format_double(r.tau), model::to_string(r.mode), format_double(r.mean_kl),
                       format_double(r.flip_rate), format_double(r.recomputation_rate),
                       format_double(r.effective_mantissa_bits), r.positions,
                       format_double(r.wall_time_seconds));
}

io::Dataset shuffle_sequences(io::Dataset dataset, std::uint64_t seed) {
    for (std::size_t s = 0; s < dataset.size(); ++s) {
        auto& seq = dataset[s];
        CounterRng rng(hash_key({seed, 0x5a1fu, s}));
        for (std::size_t i = seq.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(seq[i - 1], seq[j]);
        }
    }
    return dataset;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.weights_path.empty()) throw ValidationError("weights_path is required");
    if (config.dataset_path.empty()) throw ValidationError("dataset_path is required");
    const model::Model model = io::load_model(config.weights_path);
    const io::Dataset dataset = io::load_dataset(config.dataset_path);
    const std::string model_id = std::filesystem::path(config.weights_path).stem().string();
    std::string dataset_id = std::filesystem::path(config.dataset_path).stem().string();
    if (config.shuffle_tokens) dataset_id += "+shuffled";
    return run_sweep(config, model, dataset, model_id, dataset_id);
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const model::Model& model,
                                 const io::Dataset& dataset, const std::string& model_id,
                                 const std::string& dataset_id) {
    config.validate();
    validate_against(config, model, dataset);

    io::Dataset sequences(config.sequence_count);
    for (std::size_t s = 0; s < config.sequence_count; ++s) {
        sequences[s].assign(dataset[s].begin(),
                            dataset[s].begin() + static_cast<std::ptrdiff_t>(config.sequence_length));
    }
    if (config.shuffle_tokens) sequences = shuffle_sequences(std::move(sequences), config.seed);

    std::optional<std::ofstream> csv;
    if (!config.output_path.empty()) {
        csv.emplace(config.output_path, std::ios::binary | std::ios::trunc);
        if (!*csv) throw IoError("cannot open '" + config.output_path + "' for writing");
        *csv << csv_header() << '\n';
        csv->flush();
    }

    const auto& w = model.weights;
    const auto& cfg = model.config;
    const std::size_t n = sequences.size();

    std::vector<Tensor2D> reference(n);
    parallel_for(n, config.threads, [&](std::size_t s) {
        reference[s] = metrics::probabilities(model::reference_forward(w, cfg, sequences[s]));
    });

    std::vector<ResultRow> rows;
    std::size_t floor_hits_total = 0;
    for (int mu : config.mu_list) {
        for (double tau : config.tau_list) {
            const auto start = std::chrono::steady_clock::now();
            model::AttentionPrecisionPolicy policy{fp::FpFormat(mu), select::LampThreshold(tau),
                                                   config.mode, config.seed};

            std::vector<std::vector<metrics::PositionRecord>> records(n);
            std::vector<model::AttentionStats> stats(n);
            std::vector<std::size_t> floor_hits(n, 0);
            parallel_for(n, config.threads, [&](std::size_t s) {
                const auto result = model::forward(w, cfg, sequences[s], policy);
                records[s] = metrics::compare_positions(
                    reference[s], metrics::probabilities(result.logits), &floor_hits[s]);
                stats[s] = result.stats;
            });

            // Fixed sequence order keeps the aggregate independent of the worker count.
            std::vector<metrics::PositionRecord> all;
            model::AttentionStats total;
            for (std::size_t s = 0; s < n; ++s) {
                all.insert(all.end(), records[s].begin(), records[s].end());
                total += stats[s];
                floor_hits_total += floor_hits[s];
            }
            const metrics::RunMetrics m = metrics::aggregate(all, total, mu);
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

            ResultRow row{model_id,
                          dataset_id,
                          mu,
                          tau,
                          config.mode,
                          m.mean_kl,
                          m.flip_rate,
                          m.recomputation_rate,
                          m.effective_mantissa_bits,
                          m.positions_counted,
                          config.timing ? elapsed.count() : 0.0};
            if (csv) {
                *csv << csv_line(row) << '\n';
                csv->flush();
                if (!*csv) throw IoError("failed writing '" + config.output_path + "'");
            }
            rows.push_back(std::move(row));
        }
    }
    if (floor_hits_total > 0) {
        std::clog << "lamp: " << floor_hits_total
                  << " test probabilities were floored at 1e-30 in the KL computation\n";
    }
    return rows;
}

}  // namespace lamp::harness
