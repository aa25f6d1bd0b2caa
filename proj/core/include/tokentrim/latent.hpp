// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tokentrim/errors.hpp"

namespace tokentrim {

/// N spatial tokens by D latent channels. Every latent compared within one
/// stream shares the same shape, which is what makes token-wise comparison
/// meaningful.
struct TokenGridShape {
    std::size_t n_tokens = 0;
    std::size_t dim = 0;

    bool operator==(const TokenGridShape&) const = default;
};

/// Throws ConfigError unless n_tokens >= 1 and dim >= 1.
void validate(const TokenGridShape& shape);

/// One encoded frame: row i is token i's D-dimensional latent.
struct FrameLatent {
    TokenGridShape shape;
    Eigen::MatrixXd values; // n_tokens x dim
};

/// Temporal mean of one chunk's frame latents.
struct LatentSummary {
    TokenGridShape shape;
    Eigen::MatrixXd values; // n_tokens x dim
    int source_step = 0;
    std::size_t frame_count = 0;
};

/// Per-token drift scores plus the selected unstable set and its mean drift.
struct DriftProfile {
    Eigen::VectorXd per_token;          // d_i >= 0, length N
    std::vector<std::size_t> selected;  // ceil(fraction*N) indices, ascending
    double severity = 0.0;              // mean of per_token over selected
    double fraction = 0.0;
};

/// Maps an abstract frame payload to the stream's token grid.
class Encoder {
public:
    virtual ~Encoder() = default;

    virtual TokenGridShape output_shape() const = 0;

    /// Raw encoding step; encode_frame() wraps this with shape/finiteness checks.
    virtual Eigen::MatrixXd encode(const Eigen::MatrixXd& payload) const = 0;
};

/// Passes an already-latent N x D payload through unchanged.
class IdentityEncoder final : public Encoder {
public:
    explicit IdentityEncoder(TokenGridShape shape);

    TokenGridShape output_shape() const override { return shape_; }
    Eigen::MatrixXd encode(const Eigen::MatrixXd& payload) const override;

private:
    TokenGridShape shape_;
};

/// Cuts an H x W single-channel image into non-overlapping patches, row-major
/// over the patch grid; token i is patch i flattened row-major. An optional
/// projection (patch_len x dim_out) maps flattened patches to a narrower
/// latent width.
class PatchifyEncoder final : public Encoder {
public:
    PatchifyEncoder(std::size_t image_h, std::size_t image_w,
                    std::size_t patch_h, std::size_t patch_w);
    PatchifyEncoder(std::size_t image_h, std::size_t image_w,
                    std::size_t patch_h, std::size_t patch_w,
                    Eigen::MatrixXd projection);

    TokenGridShape output_shape() const override { return shape_; }
    Eigen::MatrixXd encode(const Eigen::MatrixXd& payload) const override;

private:
    std::size_t image_h_, image_w_, patch_h_, patch_w_;
    std::optional<Eigen::MatrixXd> projection_;
    TokenGridShape shape_;
};

/// Encodes one frame payload and validates the result against the encoder's
/// grid. Throws ShapeError on a grid mismatch, FiniteError on NaN/Inf output.
FrameLatent encode_frame(const Eigen::MatrixXd& payload, const Encoder& encoder);

/// Elementwise mean over the chunk's frames. Throws EmptyChunkError on an
/// empty list, ShapeError when frames disagree on shape.
LatentSummary summarize_chunk(const std::vector<FrameLatent>& frames, int step);

/// d_i = || curr(i) - prev(i) ||_2 for every token row.
Eigen::VectorXd per_token_drift(const LatentSummary& curr, const LatentSummary& prev);

/// ceil(fraction * n_tokens), the unstable-set size. Throws ConfigError when
/// fraction is outside (0,1) or the ceiling swallows the whole grid (pruning
/// every token leaves no retained context).
std::size_t unstable_count(std::size_t n_tokens, double fraction);

/// Selects the unstable set: the ceil(fraction*N) largest drifts, ties broken
/// by lower token index. severity is their mean.
DriftProfile build_drift_profile(const Eigen::VectorXd& drift, double fraction);

} // namespace tokentrim
