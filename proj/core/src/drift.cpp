// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/drift.hpp"

#include <cmath>
#include <string>

namespace tokentrim {

double RunningStats::mean() const {
    if (count_ == 0) {
        return 0.0;
    }
    if (mode_ == StatsMode::exact_recompute) {
        double sum = 0.0;
        for (double v : history_) {
            sum += v;
        }
        return sum / static_cast<double>(count_);
    }
    return mean_;
}

double RunningStats::std() const {
    if (count_ <= 1) {
        return 0.0;
    }
    if (mode_ == StatsMode::exact_recompute) {
        const double mu = mean();
        double ss = 0.0;
        for (double v : history_) {
            const double d = v - mu;
            ss += d * d;
        }
        return std::sqrt(ss / static_cast<double>(count_));
    }
    return std::sqrt(m2_ / static_cast<double>(count_));
}

RunningStats RunningStats::accepted(double severity) const {
    if (!std::isfinite(severity)) {
        throw FiniteError("accept_severity: non-finite severity");
    }
    RunningStats next = *this;
    next.count_ = count_ + 1;
    const double delta = severity - next.mean_;
    next.mean_ += delta / static_cast<double>(next.count_);
    next.m2_ += delta * (severity - next.mean_);
    if (mode_ == StatsMode::exact_recompute) {
        next.history_.push_back(severity);
    }
    return next;
}

RunningStats accept_severity(const RunningStats& stats, double severity) {
    return stats.accepted(severity);
}

void validate(const TriggerConfig& cfg) {
    if (!(cfg.lambda > 0.0)) {
        throw ConfigError("trigger.lambda must be > 0, got " + std::to_string(cfg.lambda));
    }
    if (cfg.warmup < 0) {
        throw ConfigError("trigger.warmup must be >= 0, got " + std::to_string(cfg.warmup));
    }
    if (!(cfg.fraction > 0.0) || !(cfg.fraction < 1.0)) {
        throw ConfigError("trigger.fraction must lie in (0,1), got " +
                          std::to_string(cfg.fraction));
    }
    if (cfg.max_regen < 0) {
        throw ConfigError("trigger.max_regen must be >= 0, got " +
                          std::to_string(cfg.max_regen));
    }
}

TriggerDecision should_trigger(const RunningStats& stats, double severity, int step,
                               const TriggerConfig& cfg) {
    TriggerDecision decision;
    decision.threshold = stats.mean() + cfg.lambda * stats.std();
    if (step <= cfg.warmup) {
        return decision;
    }
    decision.triggered = severity > decision.threshold;
    return decision;
}

} // namespace tokentrim
