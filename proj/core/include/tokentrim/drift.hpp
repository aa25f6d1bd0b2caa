// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "tokentrim/errors.hpp"

namespace tokentrim {

enum class StatsMode {
    streaming,       // Welford single-pass mean + sum of squared deviations
    exact_recompute, // keeps the history, recomputes the batch formulas on query
};

/// Running mean / population std of accepted drift severities. A value type:
/// accepted() returns the extended stats, the original is untouched.
class RunningStats {
public:
    RunningStats() = default;
    explicit RunningStats(StatsMode mode) : mode_(mode) {}

    StatsMode mode() const { return mode_; }
    std::size_t count() const { return count_; }

    /// 0 when no severities have been accepted yet.
    double mean() const;

    /// Population form sqrt(m2 / count); 0 when count <= 1.
    double std() const;

    /// Throws FiniteError on NaN/Inf.
    RunningStats accepted(double severity) const;

private:
    StatsMode mode_ = StatsMode::streaming;
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    std::vector<double> history_; // exact_recompute only
};

/// Pure update; equivalent to stats.accepted(severity).
RunningStats accept_severity(const RunningStats& stats, double severity);

/// Trigger hyperparameters. Defaults follow the published operating point:
/// 10% pruning, lambda 2.0, two warm-up steps, one regeneration attempt.
struct TriggerConfig {
    double lambda = 2.0;
    int warmup = 2;
    double fraction = 0.1;
    int max_regen = 1;
    bool enabled = true; // false = detector runs for logging only, never triggers
};

/// Throws ConfigError on out-of-range fields.
void validate(const TriggerConfig& cfg);

struct TriggerDecision {
    bool triggered = false;
    double threshold = 0.0; // mean + lambda * std, for logging
};

/// The adaptive criterion: severity > mean + lambda * std, strict, suppressed
/// while step <= cfg.warmup. `step` counts comparison steps (the first chunk
/// that has a predecessor is step 1).
TriggerDecision should_trigger(const RunningStats& stats, double severity, int step,
                               const TriggerConfig& cfg);

} // namespace tokentrim
