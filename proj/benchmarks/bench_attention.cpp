// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "tokentrim/kvcache.hpp"
#include "tokentrim/rng.hpp"

using namespace tokentrim;

static void BM_Attention(benchmark::State& state) {
    const auto rows = static_cast<Eigen::Index>(state.range(0));
    const Eigen::Index d = 16;
    GaussianSource g(1);
    const Eigen::MatrixXd q = g.matrix(64, d);
    const Eigen::MatrixXd k = g.matrix(rows, d);
    const Eigen::MatrixXd v = g.matrix(rows, d);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attention(q, k, v, static_cast<std::size_t>(d)));
    }
    state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_Attention)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_AssembleContext(benchmark::State& state) {
    const std::size_t n = 64, d = 16;
    const auto entries = static_cast<std::size_t>(state.range(0));
    GaussianSource g(2);
    KVCache cache(RollingLayout{entries}, TokenGridShape{n, d}, d);
    for (std::size_t e = 0; e < entries; ++e) {
        cache.append_chunk(g.matrix(n, d), g.matrix(n, d), static_cast<int>(e) + 1);
    }
    cache.apply_prune(PruneMask::from_selected({1, 7, 20, 33}, n));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cache.assemble_cached());
    }
}
BENCHMARK(BM_AssembleContext)->Arg(4)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
