// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tokentrim/errors.hpp"
#include "tokentrim/latent.hpp"

namespace tokentrim {

/// FIFO over the last window_chunks entries; every entry is prunable.
struct RollingLayout {
    std::size_t window_chunks = 4;
};

/// The first anchor_chunks entries are pinned forever and exempt from pruning;
/// later entries roll through a FIFO window of recent_window chunks.
struct AnchorRecentLayout {
    std::size_t anchor_chunks = 1;
    std::size_t recent_window = 3;
};

using CacheLayout = std::variant<RollingLayout, AnchorRecentLayout>;

void validate(const CacheLayout& layout);

/// Key/value projections of one generated chunk. Pruned tokens stay in
/// storage with alive=false; assemble_context() performs the compaction, so
/// masks compose and eviction bookkeeping stays trivial.
struct CacheEntry {
    int chunk_step = 0;
    Eigen::MatrixXd keys;    // n_tokens x head_dim
    Eigen::MatrixXd values;  // n_tokens x head_dim
    std::vector<bool> alive; // length n_tokens
    bool anchor = false;

    std::size_t alive_count() const;
};

/// Spatial pruning mask: keep[i] == false removes token position i.
struct PruneMask {
    std::vector<bool> keep;

    static PruneMask keep_all(std::size_t n_tokens);
    static PruneMask from_selected(const std::vector<std::size_t>& selected,
                                   std::size_t n_tokens);

    std::size_t pruned_count() const;
};

/// Temporal key/value store for previously generated chunks. One instance per
/// stream; owned and mutated by that stream's controller only.
class KVCache {
public:
    KVCache(CacheLayout layout, TokenGridShape shape, std::size_t head_dim);

    /// Appends a chunk's key/value rows with every token alive, then applies
    /// the layout's eviction rule.
    void append_chunk(const Eigen::MatrixXd& keys, const Eigen::MatrixXd& values, int step);

    /// alive[i] &= mask.keep[i] on every prunable entry. Persistent: the
    /// pruned tokens stay excluded until their entry is evicted.
    void apply_prune(const PruneMask& mask);

    /// [current; cached] concatenation over alive rows, entry order then token
    /// order. Pass 0-row matrices for the cached context alone.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
    assemble_context(const Eigen::MatrixXd& k_curr, const Eigen::MatrixXd& v_curr) const;

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_cached() const;

    std::size_t alive_rows() const;

    const std::vector<CacheEntry>& entries() const { return entries_; }
    const CacheLayout& layout() const { return layout_; }
    const TokenGridShape& shape() const { return shape_; }
    std::size_t head_dim() const { return head_dim_; }

private:
    CacheLayout layout_;
    TokenGridShape shape_;
    std::size_t head_dim_;
    std::vector<CacheEntry> entries_; // anchors first, then recents in FIFO order
};

/// softmax(q K^T / sqrt(head_dim)) V with per-row max subtraction. Throws
/// EmptyContextError when keys has no rows (over-pruned context upstream).
Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& keys,
                          const Eigen::MatrixXd& values, std::size_t head_dim);

} // namespace tokentrim
