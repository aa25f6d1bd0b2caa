// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tokentrim {

namespace {

std::string shape_str(const TokenGridShape& s) {
    return std::to_string(s.n_tokens) + "x" + std::to_string(s.dim);
}

std::string dims_str(const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_matches(const Eigen::MatrixXd& values, const TokenGridShape& shape,
                   const char* what) {
    if (values.rows() != static_cast<Eigen::Index>(shape.n_tokens) ||
        values.cols() != static_cast<Eigen::Index>(shape.dim)) {
        throw ShapeError(std::string(what) + ": got " + dims_str(values) +
                         ", expected " + shape_str(shape));
    }
}

void check_finite(const Eigen::MatrixXd& values, const char* what) {
    if (!values.allFinite()) {
        throw FiniteError(std::string(what) + ": non-finite entries");
    }
}

} // namespace

void validate(const TokenGridShape& shape) {
    if (shape.n_tokens < 1 || shape.dim < 1) {
        throw ConfigError("token grid shape must have n_tokens >= 1 and dim >= 1, got " +
                          shape_str(shape));
    }
}

IdentityEncoder::IdentityEncoder(TokenGridShape shape) : shape_(shape) {
    validate(shape_);
}

Eigen::MatrixXd IdentityEncoder::encode(const Eigen::MatrixXd& payload) const {
    return payload;
}

PatchifyEncoder::PatchifyEncoder(std::size_t image_h, std::size_t image_w,
                                 std::size_t patch_h, std::size_t patch_w)
    : PatchifyEncoder(image_h, image_w, patch_h, patch_w, Eigen::MatrixXd()) {}

PatchifyEncoder::PatchifyEncoder(std::size_t image_h, std::size_t image_w,
                                 std::size_t patch_h, std::size_t patch_w,
                                 Eigen::MatrixXd projection)
    : image_h_(image_h), image_w_(image_w), patch_h_(patch_h), patch_w_(patch_w) {
    if (patch_h_ == 0 || patch_w_ == 0 || image_h_ == 0 || image_w_ == 0) {
        throw ConfigError("patchify: zero-sized image or patch");
    }
    if (image_h_ % patch_h_ != 0 || image_w_ % patch_w_ != 0) {
        throw ConfigError("patchify: image " + std::to_string(image_h_) + "x" +
                          std::to_string(image_w_) + " not divisible by patch " +
                          std::to_string(patch_h_) + "x" + std::to_string(patch_w_));
    }
    const std::size_t n = (image_h_ / patch_h_) * (image_w_ / patch_w_);
    const std::size_t patch_len = patch_h_ * patch_w_;
    if (projection.size() > 0) {
        if (projection.rows() != static_cast<Eigen::Index>(patch_len)) {
            throw ConfigError("patchify: projection rows " + std::to_string(projection.rows()) +
                              " != patch length " + std::to_string(patch_len));
        }
        projection_ = std::move(projection);
        shape_ = TokenGridShape{n, static_cast<std::size_t>(projection_->cols())};
    } else {
        shape_ = TokenGridShape{n, patch_len};
    }
    validate(shape_);
}

Eigen::MatrixXd PatchifyEncoder::encode(const Eigen::MatrixXd& payload) const {
    if (payload.rows() != static_cast<Eigen::Index>(image_h_) ||
        payload.cols() != static_cast<Eigen::Index>(image_w_)) {
        throw ShapeError("patchify: payload " + dims_str(payload) + ", expected " +
                         std::to_string(image_h_) + "x" + std::to_string(image_w_));
    }
    const std::size_t grid_w = image_w_ / patch_w_;
    const std::size_t n = shape_.n_tokens;
    const std::size_t patch_len = patch_h_ * patch_w_;
    Eigen::MatrixXd flat(n, patch_len);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pr = i / grid_w;
        const std::size_t pc = i % grid_w;
        for (std::size_t dr = 0; dr < patch_h_; ++dr) {
            for (std::size_t dc = 0; dc < patch_w_; ++dc) {
                flat(i, dr * patch_w_ + dc) = payload(pr * patch_h_ + dr, pc * patch_w_ + dc);
            }
        }
    }
    if (projection_) {
        return flat * (*projection_);
    }
    return flat;
}

FrameLatent encode_frame(const Eigen::MatrixXd& payload, const Encoder& encoder) {
    const TokenGridShape shape = encoder.output_shape();
    Eigen::MatrixXd values = encoder.encode(payload);
    check_matches(values, shape, "encode_frame");
    check_finite(values, "encode_frame");
    return FrameLatent{shape, std::move(values)};
}

LatentSummary summarize_chunk(const std::vector<FrameLatent>& frames, int step) {
    if (frames.empty()) {
        throw EmptyChunkError("summarize_chunk: empty frame list");
    }
    const TokenGridShape shape = frames.front().shape;
    validate(shape);
    for (const FrameLatent& f : frames) {
        if (f.shape != shape) {
            throw ShapeError("summarize_chunk: frame shape " + shape_str(f.shape) +
                             " != " + shape_str(shape));
        }
        check_matches(f.values, shape, "summarize_chunk");
    }
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(shape.n_tokens, shape.dim);
    for (const FrameLatent& f : frames) {
        sum += f.values;
    }
    return LatentSummary{shape, sum / static_cast<double>(frames.size()), step, frames.size()};
}

Eigen::VectorXd per_token_drift(const LatentSummary& curr, const LatentSummary& prev) {
    if (curr.shape != prev.shape) {
        throw ShapeError("per_token_drift: shape " + shape_str(curr.shape) + " != " +
                         shape_str(prev.shape));
    }
    const Eigen::Index n = curr.values.rows();
    Eigen::VectorXd drift(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        drift(i) = (curr.values.row(i) - prev.values.row(i)).norm();
    }
    return drift;
}

std::size_t unstable_count(std::size_t n_tokens, double fraction) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw ConfigError("pruning fraction must lie in (0,1), got " + std::to_string(fraction));
    }
    const auto k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n_tokens)));
    if (k >= n_tokens) {
        throw ConfigError("pruning fraction " + std::to_string(fraction) + " selects all " +
                          std::to_string(n_tokens) + " tokens; nothing would be retained");
    }
    return k;
}

DriftProfile build_drift_profile(const Eigen::VectorXd& drift, double fraction) {
    if (drift.size() == 0) {
        throw ShapeError("build_drift_profile: empty drift vector");
    }
    if (!drift.allFinite()) {
        throw FiniteError("build_drift_profile: non-finite drift entries");
    }
    const auto n = static_cast<std::size_t>(drift.size());
    const std::size_t k = unstable_count(n, fraction);

    // Largest drift first, ties broken by lower token index. nth_element keeps
    // selection O(N); the tests cross-check against a full sort.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto before = [&drift](std::size_t a, std::size_t b) {
        const double da = drift(static_cast<Eigen::Index>(a));
        const double db = drift(static_cast<Eigen::Index>(b));
        if (da != db) {
            return da > db;
        }
        return a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), before);

    DriftProfile profile;
    profile.per_token = drift;
    profile.fraction = fraction;
    profile.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(profile.selected.begin(), profile.selected.end());

    double sum = 0.0;
    for (std::size_t idx : profile.selected) {
        sum += drift(static_cast<Eigen::Index>(idx));
    }
    profile.severity = sum / static_cast<double>(k);
    return profile;
}

} // namespace tokentrim
