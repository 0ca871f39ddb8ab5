// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <bit>
#include <cmath>
#include <vector>

#include "lamp/fp_sim.hpp"
#include "lamp/random.hpp"
#include "lamp/selection.hpp"
#include "lamp/synthetic.hpp"
#include "lamp/transformer.hpp"

namespace {

std::vector<float> normals(std::uint64_t seed, std::size_t n) {
    lamp::CounterRng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    return v;
}

std::vector<double> probability(std::uint64_t seed, std::size_t n) {
    lamp::CounterRng rng(seed);
    std::vector<double> z(n);
    double s = 0.0;
    for (auto& v : z) s += v = std::exp(3.0 * rng.normal());
    for (auto& v : z) v /= s;
    return z;
}

void BM_RoundPs(benchmark::State& state) {
    const auto xs = normals(1, 4096);
    const lamp::fp::FpFormat fmt(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        for (float x : xs) benchmark::DoNotOptimize(lamp::fp::round_ps(x, fmt));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_RoundPs)->Arg(4)->Arg(7)->Arg(23);

void BM_MixedDot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = normals(2, n), b = normals(3, n);
    const lamp::fp::MixedDotSpec spec{lamp::fp::FpFormat(7)};
    for (auto _ : state) benchmark::DoNotOptimize(lamp::fp::mixed_dot(a, b, spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MixedDot)->Arg(64)->Arg(1024);

void BM_PlainDot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = normals(2, n), b = normals(3, n);
    for (auto _ : state) benchmark::DoNotOptimize(lamp::fp::plain_dot(a, b));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlainDot)->Arg(64)->Arg(1024);

void BM_GreedySoftmax(benchmark::State& state) {
    const auto z = probability(4, static_cast<std::size_t>(state.range(0)));
    const lamp::select::LampThreshold tau(1.1);
    for (auto _ : state) benchmark::DoNotOptimize(lamp::select::solve_lamp_greedy_softmax(z, tau));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedySoftmax)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oNLogN);

void BM_BruteForce(benchmark::State& state) {
    const auto k = lamp::select::lamp_matrix_softmax(probability(5, static_cast<std::size_t>(state.range(0))));
    const lamp::select::LampThreshold tau(1.1);
    for (auto _ : state) benchmark::DoNotOptimize(lamp::select::solve_lamp_bruteforce(k, tau));
}
BENCHMARK(BM_BruteForce)->DenseRange(8, 14, 2);

void BM_Forward(benchmark::State& state) {
    static const auto model = lamp::synthetic::make_tiny_model({.seed = 1});
    const auto tokens = lamp::synthetic::make_random_dataset(1, 1, 128, model.config.vocab_size)[0];
    const auto mode = static_cast<lamp::model::AttentionMode>(state.range(0));
    const lamp::model::AttentionPrecisionPolicy policy{lamp::fp::FpFormat(4), lamp::select::LampThreshold(1.1),
                                                       mode, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(lamp::model::forward(model.weights, model.config, tokens, policy));
    }
    state.SetLabel(lamp::model::to_string(mode));
}
BENCHMARK(BM_Forward)
    ->Arg(static_cast<int>(lamp::model::AttentionMode::off))
    ->Arg(static_cast<int>(lamp::model::AttentionMode::lamp))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
