// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

// lamp-infer: run accuracy / recomputation sweeps of look-ahead mixed-precision attention.
//
//   lamp-infer run --config sweep.json
//   lamp-infer gen-tiny --seed 1 --out tiny.lampw [--dataset-out tiny.lampt]
//   lamp-infer sweep --mu 2,4,7,10 --tau 1.02,1.1,1.4,2.0 --mode lamp --weights W --dataset D
//
// Exit codes: 0 success, 1 validation error, 2 I/O or format error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lamp/formats.hpp"
#include "lamp/harness.hpp"
#include "lamp/synthetic.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void print_rows(const std::vector<lamp::harness::ResultRow>& rows, bool to_stdout) {
    if (!to_stdout) return;
    std::cout << lamp::harness::csv_header() << '\n';
    for (const auto& r : rows) std::cout << lamp::harness::csv_line(r) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Look-ahead mixed-precision transformer inference experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t run_threads = 0;
    auto* run = app.add_subcommand("run", "Run a sweep described by a JSON config file");
    run->add_option("--config", config_path, "Path to the JSON config")->required();
    run->add_option("--threads", run_threads, "Override the config's worker count");

    std::uint64_t tiny_seed = 0;
    std::string tiny_out;
    std::string tiny_dataset_out;
    std::size_t tiny_seqs = 20;
    std::size_t tiny_len = 256;
    auto* gen = app.add_subcommand("gen-tiny", "Write a seeded random tiny model (LAMPW01)");
    gen->add_option("--seed", tiny_seed, "Generator seed");
    gen->add_option("--out", tiny_out, "Output weights path")->required();
    gen->add_option("--dataset-out", tiny_dataset_out, "Also write a random LAMPT01 dataset");
    gen->add_option("--seqs", tiny_seqs, "Sequences in the generated dataset");
    gen->add_option("--seq-len", tiny_len, "Tokens per generated sequence");

    lamp::harness::ExperimentConfig sweep_cfg;
    std::string mode_text = "lamp";
    auto* sweep = app.add_subcommand("sweep", "Run a (mu, tau) sweep from command-line flags");
    sweep->add_option("--mu", sweep_cfg.mu_list, "Mantissa bits of the score accumulator")
        ->delimiter(',');
    sweep->add_option("--tau", sweep_cfg.tau_list, "LAMP thresholds")->delimiter(',');
    sweep->add_option("--mode", mode_text, "lamp | random | off")
        ->check(CLI::IsMember({"lamp", "random", "random-budget", "off"}));
    sweep->add_flag("--shuffle", sweep_cfg.shuffle_tokens, "Randomly permute every sequence");
    sweep->add_option("--seqs", sweep_cfg.sequence_count, "Number of sequences");
    sweep->add_option("--seq-len", sweep_cfg.sequence_length, "Tokens per sequence");
    sweep->add_option("--weights", sweep_cfg.weights_path, "LAMPW01 weights")->required();
    sweep->add_option("--dataset", sweep_cfg.dataset_path, "LAMPT01 dataset")->required();
    sweep->add_option("--out", sweep_cfg.output_path, "CSV output (stdout if omitted)");
    sweep->add_option("--seed", sweep_cfg.seed, "Seed for shuffling and random-budget selection");
    sweep->add_option("--threads", sweep_cfg.threads, "Worker threads");
    sweep->add_flag("--timing", sweep_cfg.timing, "Record wall_time_seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*run) {
            auto cfg = lamp::harness::ExperimentConfig::load(config_path);
            if (run_threads > 0) cfg.threads = run_threads;
            print_rows(lamp::harness::run_sweep(cfg), cfg.output_path.empty());
        } else if (*gen) {
            lamp::synthetic::TinyModelOptions options;
            options.seed = tiny_seed;
            const auto model = lamp::synthetic::make_tiny_model(options);
            lamp::io::save_model(tiny_out, model);
            if (!tiny_dataset_out.empty()) {
                lamp::io::save_dataset(tiny_dataset_out,
                                       lamp::synthetic::make_random_dataset(
                                           tiny_seed, tiny_seqs, tiny_len, model.config.vocab_size));
            }
        } else if (*sweep) {
            sweep_cfg.mode = lamp::model::parse_attention_mode(mode_text);
            print_rows(lamp::harness::run_sweep(sweep_cfg), sweep_cfg.output_path.empty());
        }
    } catch (const lamp::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const lamp::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
