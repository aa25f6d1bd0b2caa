// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/kvcache.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tokentrim {

namespace {

std::string dims_str(const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

void validate(const CacheLayout& layout) {
    if (const auto* rolling = std::get_if<RollingLayout>(&layout)) {
        if (rolling->window_chunks < 1) {
            throw ConfigError("layout.window_chunks must be >= 1");
        }
        return;
    }
    const auto& ar = std::get<AnchorRecentLayout>(layout);
    if (ar.anchor_chunks < 1) {
        throw ConfigError("layout.anchor_chunks must be >= 1");
    }
    if (ar.recent_window < 1) {
        throw ConfigError("layout.recent_window must be >= 1");
    }
}

std::size_t CacheEntry::alive_count() const {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
}

PruneMask PruneMask::keep_all(std::size_t n_tokens) {
    return PruneMask{std::vector<bool>(n_tokens, true)};
}

PruneMask PruneMask::from_selected(const std::vector<std::size_t>& selected,
                                   std::size_t n_tokens) {
    PruneMask mask = keep_all(n_tokens);
    for (std::size_t idx : selected) {
        if (idx >= n_tokens) {
            throw ShapeError("prune mask: index " + std::to_string(idx) + " out of range for " +
                             std::to_string(n_tokens) + " tokens");
        }
        mask.keep[idx] = false;
    }
    return mask;
}

std::size_t PruneMask::pruned_count() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));
}

KVCache::KVCache(CacheLayout layout, TokenGridShape shape, std::size_t head_dim)
    : layout_(layout), shape_(shape), head_dim_(head_dim) {
    validate(layout_);
    validate(shape_);
    if (head_dim_ < 1) {
        throw ConfigError("head_dim must be >= 1");
    }
}

void KVCache::append_chunk(const Eigen::MatrixXd& keys, const Eigen::MatrixXd& values,
                           int step) {
    const auto n = static_cast<Eigen::Index>(shape_.n_tokens);
    const auto d = static_cast<Eigen::Index>(head_dim_);
    if (keys.rows() != n || keys.cols() != d) {
        throw ShapeError("append_chunk: keys " + dims_str(keys) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(d));
    }
    if (values.rows() != n || values.cols() != d) {
        throw ShapeError("append_chunk: values " + dims_str(values) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(d));
    }

    CacheEntry entry{step, keys, values, std::vector<bool>(shape_.n_tokens, true), false};

    if (const auto* rolling = std::get_if<RollingLayout>(&layout_)) {
        entries_.push_back(std::move(entry));
        while (entries_.size() > rolling->window_chunks) {
            entries_.erase(entries_.begin());
        }
        return;
    }

    const auto& ar = std::get<AnchorRecentLayout>(layout_);
    const auto anchors = static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(),
                      [](const CacheEntry& e) { return e.anchor; }));
    if (anchors < ar.anchor_chunks) {
        entry.anchor = true;
        entries_.push_back(std::move(entry));
        return;
    }
    entries_.push_back(std::move(entry));
    std::size_t recents = entries_.size() - anchors;
    while (recents > ar.recent_window) {
        const auto oldest_recent = std::find_if(
            entries_.begin(), entries_.end(), [](const CacheEntry& e) { return !e.anchor; });
        entries_.erase(oldest_recent);
        --recents;
    }
}

void KVCache::apply_prune(const PruneMask& mask) {
    if (mask.keep.size() != shape_.n_tokens) {
        throw ShapeError("apply_prune: mask length " + std::to_string(mask.keep.size()) +
                         " != n_tokens " + std::to_string(shape_.n_tokens));
    }
    for (CacheEntry& entry : entries_) {
        if (entry.anchor) {
            continue; // anchors are exempt by layout contract
        }
        for (std::size_t i = 0; i < shape_.n_tokens; ++i) {
            entry.alive[i] = entry.alive[i] && mask.keep[i];
        }
    }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
KVCache::assemble_context(const Eigen::MatrixXd& k_curr, const Eigen::MatrixXd& v_curr) const {
    const auto d = static_cast<Eigen::Index>(head_dim_);
    if (k_curr.rows() != v_curr.rows()) {
        throw ShapeError("assemble_context: current keys/values row mismatch");
    }
    if (k_curr.rows() > 0 && (k_curr.cols() != d || v_curr.cols() != d)) {
        throw ShapeError("assemble_context: current tokens have width " +
                         std::to_string(k_curr.cols()) + ", expected " + std::to_string(d));
    }

    const Eigen::Index total = k_curr.rows() + static_cast<Eigen::Index>(alive_rows());
    Eigen::MatrixXd keys(total, d);
    Eigen::MatrixXd values(total, d);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < k_curr.rows(); ++i, ++row) {
        keys.row(row) = k_curr.row(i);
        values.row(row) = v_curr.row(i);
    }
    for (const CacheEntry& entry : entries_) {
        for (std::size_t i = 0; i < shape_.n_tokens; ++i) {
            if (!entry.alive[i]) {
                continue;
            }
            keys.row(row) = entry.keys.row(static_cast<Eigen::Index>(i));
            values.row(row) = entry.values.row(static_cast<Eigen::Index>(i));
            ++row;
        }
    }
    return {std::move(keys), std::move(values)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> KVCache::assemble_cached() const {
    const auto d = static_cast<Eigen::Index>(head_dim_);
    return assemble_context(Eigen::MatrixXd(0, d), Eigen::MatrixXd(0, d));
}

std::size_t KVCache::alive_rows() const {
    std::size_t total = 0;
    for (const CacheEntry& entry : entries_) {
        total += entry.alive_count();
    }
    return total;
}

Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& keys,
                          const Eigen::MatrixXd& values, std::size_t head_dim) {
    if (keys.rows() == 0) {
        throw EmptyContextError("attention: empty key/value context");
    }
    if (q.cols() != keys.cols()) {
        throw ShapeError("attention: query width " + std::to_string(q.cols()) +
                         " != key width " + std::to_string(keys.cols()));
    }
    if (keys.rows() != values.rows()) {
        throw ShapeError("attention: keys rows " + std::to_string(keys.rows()) +
                         " != values rows " + std::to_string(values.rows()));
    }
    if (head_dim < 1) {
        throw ConfigError("attention: head_dim must be >= 1");
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    Eigen::MatrixXd logits = (q * keys.transpose()) * scale;

    // Row softmax with max subtraction; plain loops keep the reduction order
    // fixed.
    const Eigen::Index rows = logits.rows();
    const Eigen::Index cols = logits.cols();
    for (Eigen::Index i = 0; i < rows; ++i) {
        double row_max = logits(i, 0);
        for (Eigen::Index j = 1; j < cols; ++j) {
            row_max = std::max(row_max, logits(i, j));
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double e = std::exp(logits(i, j) - row_max);
            logits(i, j) = e;
            denom += e;
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            logits(i, j) /= denom;
        }
    }
    return logits * values;
}

} // namespace tokentrim
