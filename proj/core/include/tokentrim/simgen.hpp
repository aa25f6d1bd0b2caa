// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tokentrim/controller.hpp"
#include "tokentrim/latent.hpp"

namespace tokentrim {

enum class CorruptionPersistence {
    one_shot,              // transient glitch: first generation attempt at the step only
    recurring_via_context, // every attempt at the step; enters the cache regardless
};

/// Additive corruption of selected token rows at one step. Each listed row
/// receives an offset of exactly `magnitude` Euclidean norm, in a direction
/// drawn once per event from its own seeded stream (so injection never shifts
/// the generator's other draws).
struct CorruptionEvent {
    int step = 0;
    std::vector<std::size_t> token_indices;
    double magnitude = 0.0;
    CorruptionPersistence persistence = CorruptionPersistence::one_shot;
};

enum class InitMode {
    plain,
    stabilized, // lower-noise first chunk standing in for a motion-stabilized start
};

struct InitPolicy {
    InitMode mode = InitMode::plain;
    double stabilized_noise_scale = 0.5; // applies in stabilized mode only
};

void validate(const InitPolicy& policy);

/// Synthetic autoregressive latent dynamics: the next chunk mixes an
/// attention readout over the cached context with the previous summary, plus
/// Gaussian step noise. Small enough for sub-second steps, but corruption in
/// cached tokens causally reaches future chunks through the readout, which is
/// exactly the pathway pruning interrupts.
struct GeneratorConfig {
    TokenGridShape shape{64, 16};  // 8x8 grid
    std::size_t frames_per_chunk = 3;
    std::size_t head_dim = 16;
    std::uint64_t seed = 1;
    double base_noise = 0.02;   // sigma of per-token step noise
    double frame_jitter = 0.25; // per-frame jitter sigma, as a fraction of base_noise
    double context_mix = 0.6;   // alpha: readout weight vs previous summary
    double query_gain = 25.0;   // readout attention sharpness
    std::vector<CorruptionEvent> corruption_schedule;
};

void validate(const GeneratorConfig& cfg);

struct InitChunk {
    std::vector<FrameLatent> frames;
    LatentSummary summary;
};

/// First-chunk construction: seeded Gaussian latents at base_noise scale,
/// shrunk by stabilized_noise_scale in stabilized mode.
InitChunk make_init(const InitPolicy& policy, const GeneratorConfig& cfg);

/// Adds the event's seeded offset to each listed token row. Throws ShapeError
/// on an out-of-range index.
Eigen::MatrixXd inject_corruption(Eigen::MatrixXd latents, const CorruptionEvent& event,
                                  std::uint64_t stream_seed);

/// GeneratorPort implementation backed by the toy dynamics above. All outputs
/// are pure functions of (config, init policy, step, inputs); two generators
/// with the same config replay identical streams.
class SimGenerator final : public GeneratorPort {
public:
    SimGenerator(GeneratorConfig cfg, InitPolicy init);

    TokenGridShape grid_shape() const override { return cfg_.shape; }
    std::size_t head_dim() const override { return cfg_.head_dim; }

    GeneratedBatch initial_batch() override;
    GeneratedBatch generate_batch(const LatentSummary& prev_summary,
                                  const Eigen::MatrixXd& context_keys,
                                  const Eigen::MatrixXd& context_values,
                                  int step) override;

    const GeneratorConfig& config() const { return cfg_; }
    const InitPolicy& init_policy() const { return init_; }

    // Fixed seeded projections, exposed so tests can form closed-form contexts.
    const Eigen::MatrixXd& key_projection() const { return w_k_; }   // dim x head_dim
    const Eigen::MatrixXd& value_projection() const { return w_v_; } // dim x head_dim

    /// The queries the dynamics derive from a previous summary.
    Eigen::MatrixXd queries_for(const LatentSummary& prev_summary) const;

private:
    GeneratedBatch project_batch(std::vector<FrameLatent> frames, int step) const;

    GeneratorConfig cfg_;
    InitPolicy init_;
    Eigen::MatrixXd w_k_;
    Eigen::MatrixXd w_v_;
    int current_step_ = -1; // attempt tracking for one-shot corruption
    int attempt_ = 0;
};

} // namespace tokentrim
