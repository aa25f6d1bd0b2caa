// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "tokentrim/controller.hpp"
#include "tokentrim/latent.hpp"
#include "tokentrim/rng.hpp"
#include "tokentrim/simgen.hpp"

using namespace tokentrim;

static void BM_DriftProfile(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    GaussianSource g(3);
    const Eigen::VectorXd drift = g.matrix(n, 1).cwiseAbs();
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_drift_profile(drift, 0.1));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DriftProfile)->Arg(64)->Arg(1024)->Arg(16384);

static void BM_RunStream(benchmark::State& state) {
    const auto steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        GeneratorConfig cfg; // default 64x16 grid, 3 frames per chunk
        cfg.seed = 7;
        SimGenerator gen(cfg, InitPolicy{InitMode::stabilized, 0.5});
        benchmark::DoNotOptimize(run_stream(gen, TriggerConfig{}, RollingLayout{4}, steps));
    }
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_RunStream)->Arg(10)->Arg(50);
