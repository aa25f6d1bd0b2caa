// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "tokentrim/drift.hpp"
#include "tokentrim/kvcache.hpp"
#include "tokentrim/latent.hpp"

namespace tokentrim {

enum class AcceptedVia {
    warmup,
    under_threshold,
    regenerated,
    regen_exhausted,
};

const char* to_string(AcceptedVia via);

/// Record of one controller step, the controller's sole observable.
/// step is the 1-based position in the stream; step 1 is the initialization
/// chunk (no predecessor, recorded with zero severity as a warmup row).
struct StepOutcome {
    int step = 0;
    double severity_initial = 0.0;
    double threshold = 0.0;
    bool triggered = false;
    std::vector<std::size_t> pruned_indices; // the candidate's unstable set when triggered
    double severity_final = 0.0;
    int regen_count = 0;
    AcceptedVia accepted_via = AcceptedVia::warmup;
    std::size_t alive_rows = 0; // cached alive tokens after the step completed
};

/// One generated chunk plus its key/value projections.
struct GeneratedBatch {
    std::vector<FrameLatent> frames;
    Eigen::MatrixXd k_new; // n_tokens x head_dim
    Eigen::MatrixXd v_new; // n_tokens x head_dim
};

/// Abstract chunk generator driven by the controller. Implementations must be
/// deterministic: the same seed, step, previous summary, and context produce
/// the identical batch, so streams are replayable.
class GeneratorPort {
public:
    virtual ~GeneratorPort() = default;

    virtual TokenGridShape grid_shape() const = 0;
    virtual std::size_t head_dim() const = 0;

    /// The stream's first chunk; generated without cached context or gating.
    virtual GeneratedBatch initial_batch() = 0;

    /// Next candidate chunk conditioned on the assembled cached context.
    virtual GeneratedBatch generate_batch(const LatentSummary& prev_summary,
                                          const Eigen::MatrixXd& context_keys,
                                          const Eigen::MatrixXd& context_values,
                                          int step) = 0;
};

struct StepResult {
    std::vector<FrameLatent> frames; // the accepted batch
    LatentSummary summary;
    StepOutcome outcome;
};

/// Runs a single controller step for stream position `step` (>= 2; position 1
/// is initialization): generate a candidate against the current cache, score
/// its drift against prev_summary, gate on the adaptive criterion, and on a
/// trigger prune the cache and regenerate up to cfg.max_regen times, accepting
/// as-is once the budget is exhausted. The accepted chunk's key/values are
/// appended and its severity pushed into stats.
///
/// Warm-up counts comparison steps: position `step` is warm-up while
/// step - 1 <= cfg.warmup, so with warmup=2 the first gated position is 4 and
/// the statistics always hold at least two severities by then.
StepResult tokentrim_step(const LatentSummary& prev_summary, GeneratorPort& gen,
                          KVCache& cache, RunningStats& stats, const TriggerConfig& cfg,
                          int step);

struct StreamResult {
    std::vector<StepOutcome> outcomes;                // one per stream position
    std::vector<std::vector<FrameLatent>> frames;     // accepted frames per position
    std::vector<LatentSummary> summaries;             // accepted summary per position
    RunningStats stats;
    KVCache cache;
};

/// Drives a whole stream: position 1 from gen.initial_batch() appended without
/// gating, positions 2..steps through tokentrim_step.
StreamResult run_stream(GeneratorPort& gen, const TriggerConfig& cfg,
                        const CacheLayout& layout, int steps);

} // namespace tokentrim
