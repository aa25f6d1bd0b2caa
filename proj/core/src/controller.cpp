// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/controller.hpp"

#include <string>
#include <utility>

namespace tokentrim {

const char* to_string(AcceptedVia via) {
    switch (via) {
    case AcceptedVia::warmup:
        return "warmup";
    case AcceptedVia::under_threshold:
        return "under-threshold";
    case AcceptedVia::regenerated:
        return "regenerated";
    case AcceptedVia::regen_exhausted:
        return "regen-exhausted";
    }
    return "unknown";
}

StepResult tokentrim_step(const LatentSummary& prev_summary, GeneratorPort& gen,
                          KVCache& cache, RunningStats& stats, const TriggerConfig& cfg,
                          int step) {
    if (step < 2) {
        throw ConfigError("tokentrim_step: step must be >= 2 (position 1 is initialization)");
    }
    if (prev_summary.shape != cache.shape()) {
        throw ShapeError("tokentrim_step: previous summary shape does not match cache shape");
    }
    validate(cfg);

    const int comparison_step = step - 1; // Alg. time: first chunk with a predecessor is 1

    auto [ctx_k, ctx_v] = cache.assemble_cached();
    GeneratedBatch candidate = gen.generate_batch(prev_summary, ctx_k, ctx_v, step);
    LatentSummary cand_summary = summarize_chunk(candidate.frames, step);
    const Eigen::VectorXd drift = per_token_drift(cand_summary, prev_summary);
    const DriftProfile profile = build_drift_profile(drift, cfg.fraction);

    TriggerDecision decision = should_trigger(stats, profile.severity, comparison_step, cfg);
    if (!cfg.enabled) {
        decision.triggered = false;
    }

    StepOutcome outcome;
    outcome.step = step;
    outcome.severity_initial = profile.severity;
    outcome.threshold = decision.threshold;
    outcome.triggered = decision.triggered;

    GeneratedBatch accepted;
    LatentSummary accepted_summary;
    if (!decision.triggered) {
        accepted = std::move(candidate);
        accepted_summary = std::move(cand_summary);
        outcome.severity_final = profile.severity;
        outcome.accepted_via = comparison_step <= cfg.warmup ? AcceptedVia::warmup
                                                             : AcceptedVia::under_threshold;
    } else {
        outcome.pruned_indices = profile.selected;
        cache.apply_prune(PruneMask::from_selected(profile.selected, cache.shape().n_tokens));

        if (cfg.max_regen == 0) {
            // Masking precedes generation, so the prune sticks even when no
            // regeneration budget is left; the candidate is accepted as-is.
            accepted = std::move(candidate);
            accepted_summary = std::move(cand_summary);
            outcome.severity_final = profile.severity;
            outcome.accepted_via = AcceptedVia::regen_exhausted;
        } else {
            auto [pruned_k, pruned_v] = cache.assemble_cached();
            bool within_threshold = false;
            int attempts = 0;
            GeneratedBatch regen;
            LatentSummary regen_summary;
            double regen_severity = 0.0;
            while (attempts < cfg.max_regen) {
                ++attempts;
                regen = gen.generate_batch(prev_summary, pruned_k, pruned_v, step);
                regen_summary = summarize_chunk(regen.frames, step);
                const Eigen::VectorXd regen_drift = per_token_drift(regen_summary, prev_summary);
                regen_severity = build_drift_profile(regen_drift, cfg.fraction).severity;
                // Re-scored against the same pre-step statistics.
                if (!should_trigger(stats, regen_severity, comparison_step, cfg).triggered) {
                    within_threshold = true;
                    break;
                }
            }
            accepted = std::move(regen);
            accepted_summary = std::move(regen_summary);
            outcome.severity_final = regen_severity;
            outcome.regen_count = attempts;
            outcome.accepted_via =
                within_threshold ? AcceptedVia::regenerated : AcceptedVia::regen_exhausted;
        }
    }

    cache.append_chunk(accepted.k_new, accepted.v_new, step);
    stats = accept_severity(stats, outcome.severity_final);
    outcome.alive_rows = cache.alive_rows();

    return StepResult{std::move(accepted.frames), std::move(accepted_summary),
                      std::move(outcome)};
}

StreamResult run_stream(GeneratorPort& gen, const TriggerConfig& cfg,
                        const CacheLayout& layout, int steps) {
    if (steps < 1) {
        throw ConfigError("run_stream: steps must be >= 1");
    }
    validate(cfg);

    KVCache cache(layout, gen.grid_shape(), gen.head_dim());
    RunningStats stats;

    GeneratedBatch init = gen.initial_batch();
    LatentSummary init_summary = summarize_chunk(init.frames, 1);
    cache.append_chunk(init.k_new, init.v_new, 1);

    StepOutcome init_outcome;
    init_outcome.step = 1;
    init_outcome.accepted_via = AcceptedVia::warmup;
    init_outcome.alive_rows = cache.alive_rows();

    StreamResult result{{}, {}, {}, stats, std::move(cache)};
    result.outcomes.push_back(std::move(init_outcome));
    result.frames.push_back(std::move(init.frames));
    result.summaries.push_back(init_summary);

    LatentSummary prev = std::move(init_summary);
    for (int step = 2; step <= steps; ++step) {
        StepResult r = tokentrim_step(prev, gen, result.cache, result.stats, cfg, step);
        prev = r.summary;
        result.outcomes.push_back(std::move(r.outcome));
        result.frames.push_back(std::move(r.frames));
        result.summaries.push_back(std::move(r.summary));
    }
    return result;
}

} // namespace tokentrim
