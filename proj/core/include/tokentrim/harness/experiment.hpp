// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tokentrim/controller.hpp"
#include "tokentrim/harness/config.hpp"

namespace tokentrim::harness {

/// Per-run aggregates; every field is recomputable exactly from the emitted
/// CSV rows. Means and the severity area cover comparison steps (step >= 2);
/// the initialization row carries zero severity by construction.
struct RunAggregates {
    int steps = 0;
    int comparison_steps = 0;
    int trigger_count = 0;
    int regen_total = 0;
    int regenerated_steps = 0;
    double regeneration_rate = 0.0; // regenerated_steps / comparison_steps
    double mean_severity_initial = 0.0;
    double mean_severity_final = 0.0;
    double cumulative_severity_area = 0.0; // sum of severity_final, steps >= 2
    long long pruned_total = 0;
    long long alive_rows_sum = 0;
    long long alive_rows_min = 0;
    long long final_alive_rows = 0;
};

RunAggregates compute_aggregates(const std::vector<StepOutcome>& outcomes);

/// One seed's run: the outcome rows plus aggregates. wall_ms is console-only
/// diagnostics and never reaches the emitted files (they must be
/// byte-reproducible).
struct RunRecord {
    std::uint64_t seed = 0;
    std::vector<StepOutcome> outcomes;
    RunAggregates aggregates;
    Eigen::MatrixXd final_summary;
    double wall_ms = 0.0;
};

/// Runs one stream for one seed (cfg.generator.seed replaced by `seed`).
StreamResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

/// One record per configured seed, in seed-list order. Seeds run on a worker
/// pool; results are deterministic per (config, seed) regardless of pool size.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

} // namespace tokentrim::harness
