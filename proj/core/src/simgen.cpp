// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/simgen.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/QR>

#include "tokentrim/kvcache.hpp"
#include "tokentrim/rng.hpp"

namespace tokentrim {

namespace {

// Stream tags for seed derivation; each consumer owns an independent stream so
// corruption or config toggles never shift unrelated draws.
constexpr std::uint64_t kTagChunkNoise = 0x11;
constexpr std::uint64_t kTagFrameJitter = 0x12;
constexpr std::uint64_t kTagInit = 0x13;
constexpr std::uint64_t kTagInitJitter = 0x14;
constexpr std::uint64_t kTagKeyProj = 0x15;
constexpr std::uint64_t kTagValueProj = 0x16;
constexpr std::uint64_t kTagCorruption = 0x17;

Eigen::MatrixXd orthonormal_projection(std::uint64_t seed, std::size_t dim,
                                       std::size_t head_dim) {
    GaussianSource src(seed);
    const Eigen::MatrixXd a = src.matrix(static_cast<Eigen::Index>(dim),
                                         static_cast<Eigen::Index>(head_dim));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() *
           Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                     static_cast<Eigen::Index>(head_dim));
}

Eigen::MatrixXd unit_rows(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 1e-300) {
            out.row(i) /= norm;
        } else {
            out.row(i).setZero();
        }
    }
    return out;
}

} // namespace

void validate(const InitPolicy& policy) {
    if (policy.mode == InitMode::stabilized &&
        (!(policy.stabilized_noise_scale > 0.0) || policy.stabilized_noise_scale > 1.0)) {
        throw ConfigError("init.stabilized_noise_scale must lie in (0,1], got " +
                          std::to_string(policy.stabilized_noise_scale));
    }
}

void validate(const GeneratorConfig& cfg) {
    validate(cfg.shape);
    if (cfg.frames_per_chunk < 1) {
        throw ConfigError("generator.frames_per_chunk must be >= 1");
    }
    if (cfg.head_dim < 1 || cfg.head_dim > cfg.shape.dim) {
        throw ConfigError("generator.head_dim must lie in [1, dim], got " +
                          std::to_string(cfg.head_dim));
    }
    if (cfg.base_noise < 0.0) {
        throw ConfigError("generator.base_noise must be >= 0");
    }
    if (cfg.frame_jitter < 0.0) {
        throw ConfigError("generator.frame_jitter must be >= 0");
    }
    if (cfg.context_mix < 0.0 || cfg.context_mix > 1.0) {
        throw ConfigError("generator.context_mix must lie in [0,1], got " +
                          std::to_string(cfg.context_mix));
    }
    if (cfg.query_gain < 0.0) {
        throw ConfigError("generator.query_gain must be >= 0");
    }
    for (std::size_t i = 0; i < cfg.corruption_schedule.size(); ++i) {
        const CorruptionEvent& ev = cfg.corruption_schedule[i];
        const std::string where = "generator.corruption_schedule[" + std::to_string(i) + "]";
        if (ev.step < 1) {
            throw ConfigError(where + ".step must be >= 1");
        }
        if (ev.token_indices.empty()) {
            throw ConfigError(where + ".token_indices must be nonempty");
        }
        if (!(ev.magnitude > 0.0)) {
            throw ConfigError(where + ".magnitude must be > 0");
        }
        for (std::size_t idx : ev.token_indices) {
            if (idx >= cfg.shape.n_tokens) {
                throw ConfigError(where + ".token_indices: index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(cfg.shape.n_tokens) +
                                  " tokens");
            }
        }
    }
}

InitChunk make_init(const InitPolicy& policy, const GeneratorConfig& cfg) {
    validate(cfg);
    validate(policy);
    const auto n = static_cast<Eigen::Index>(cfg.shape.n_tokens);
    const auto d = static_cast<Eigen::Index>(cfg.shape.dim);
    const double sigma =
        cfg.base_noise *
        (policy.mode == InitMode::stabilized ? policy.stabilized_noise_scale : 1.0);

    GaussianSource base_src(derive_seed(cfg.seed, kTagInit));
    const Eigen::MatrixXd base = sigma * base_src.matrix(n, d);

    InitChunk chunk;
    chunk.frames.reserve(cfg.frames_per_chunk);
    for (std::size_t f = 0; f < cfg.frames_per_chunk; ++f) {
        GaussianSource jitter_src(derive_seed(cfg.seed, kTagInitJitter, f));
        chunk.frames.push_back(
            FrameLatent{cfg.shape, base + sigma * cfg.frame_jitter * jitter_src.matrix(n, d)});
    }
    chunk.summary = summarize_chunk(chunk.frames, 1);
    return chunk;
}

Eigen::MatrixXd inject_corruption(Eigen::MatrixXd latents, const CorruptionEvent& event,
                                  std::uint64_t stream_seed) {
    GaussianSource dir_src(
        derive_seed(stream_seed, kTagCorruption, static_cast<std::uint64_t>(event.step)));
    for (std::size_t idx : event.token_indices) {
        if (static_cast<Eigen::Index>(idx) >= latents.rows()) {
            throw ShapeError("inject_corruption: token index " + std::to_string(idx) +
                             " out of range for " + std::to_string(latents.rows()) + " rows");
        }
        Eigen::RowVectorXd dir = dir_src.matrix(1, latents.cols());
        const double norm = dir.norm();
        if (norm > 1e-300) {
            dir /= norm;
        } else {
            dir.setZero();
            dir(0) = 1.0;
        }
        latents.row(static_cast<Eigen::Index>(idx)) += event.magnitude * dir;
    }
    return latents;
}

SimGenerator::SimGenerator(GeneratorConfig cfg, InitPolicy init)
    : cfg_(std::move(cfg)), init_(init) {
    validate(cfg_);
    validate(init_);
    w_k_ = orthonormal_projection(derive_seed(cfg_.seed, kTagKeyProj), cfg_.shape.dim,
                                  cfg_.head_dim);
    w_v_ = orthonormal_projection(derive_seed(cfg_.seed, kTagValueProj), cfg_.shape.dim,
                                  cfg_.head_dim);
}

Eigen::MatrixXd SimGenerator::queries_for(const LatentSummary& prev_summary) const {
    // Unit-normalized rows keep the readout temperature stable as latent
    // norms drift; sqrt(head_dim) cancels the attention kernel's scaling.
    const double gain = cfg_.query_gain * std::sqrt(static_cast<double>(cfg_.head_dim));
    return gain * unit_rows(prev_summary.values) * w_k_;
}

GeneratedBatch SimGenerator::project_batch(std::vector<FrameLatent> frames, int step) const {
    const LatentSummary summary = summarize_chunk(frames, step);
    GeneratedBatch batch;
    batch.k_new = summary.values * w_k_;
    batch.v_new = summary.values * w_v_;
    batch.frames = std::move(frames);
    return batch;
}

GeneratedBatch SimGenerator::initial_batch() {
    current_step_ = -1;
    attempt_ = 0;
    InitChunk chunk = make_init(init_, cfg_);
    return project_batch(std::move(chunk.frames), 1);
}

GeneratedBatch SimGenerator::generate_batch(const LatentSummary& prev_summary,
                                            const Eigen::MatrixXd& context_keys,
                                            const Eigen::MatrixXd& context_values,
                                            int step) {
    if (prev_summary.shape != cfg_.shape) {
        throw ShapeError("generate_batch: previous summary shape does not match generator");
    }
    if (step == current_step_) {
        ++attempt_;
    } else {
        current_step_ = step;
        attempt_ = 1;
    }

    const auto n = static_cast<Eigen::Index>(cfg_.shape.n_tokens);
    const auto d = static_cast<Eigen::Index>(cfg_.shape.dim);

    const Eigen::MatrixXd q = queries_for(prev_summary);
    const Eigen::MatrixXd head = attention(q, context_keys, context_values, cfg_.head_dim);
    const Eigen::MatrixXd readout = head * w_v_.transpose();

    Eigen::MatrixXd base = cfg_.context_mix * readout +
                           (1.0 - cfg_.context_mix) * prev_summary.values;
    GaussianSource noise_src(
        derive_seed(cfg_.seed, kTagChunkNoise, static_cast<std::uint64_t>(step)));
    base += cfg_.base_noise * noise_src.matrix(n, d);

    for (const CorruptionEvent& ev : cfg_.corruption_schedule) {
        if (ev.step != step) {
            continue;
        }
        if (ev.persistence == CorruptionPersistence::one_shot && attempt_ != 1) {
            continue;
        }
        base = inject_corruption(std::move(base), ev, cfg_.seed);
    }

    std::vector<FrameLatent> frames;
    frames.reserve(cfg_.frames_per_chunk);
    for (std::size_t f = 0; f < cfg_.frames_per_chunk; ++f) {
        GaussianSource jitter_src(
            derive_seed(cfg_.seed, kTagFrameJitter, static_cast<std::uint64_t>(step), f));
        frames.push_back(FrameLatent{
            cfg_.shape, base + cfg_.base_noise * cfg_.frame_jitter * jitter_src.matrix(n, d)});
    }
    return project_batch(std::move(frames), step);
}

} // namespace tokentrim
