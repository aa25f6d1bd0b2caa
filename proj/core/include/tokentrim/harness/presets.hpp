// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tokentrim/harness/config.hpp"

namespace tokentrim::harness {

struct PresetInfo {
    std::string name;
    std::string description;
};

/// Built-in experiment presets:
///   baseline             — detector logs severities but never triggers; plain init
///   tokentrim-default    — 10% pruning, lambda 2.0, warmup 2, one regeneration,
///                          stabilized init (the published operating point)
///   tokentrim-5pct       — default with 5% pruning
///   tokentrim-20pct      — default with 20% pruning
///   tokentrim-plain-init — default without the stabilized first chunk
std::vector<PresetInfo> list_presets();

/// Throws ConfigError for an unknown name.
ExperimentConfig preset_config(const std::string& name);

/// The standard corruption scenario used by experiments and the golden runs:
/// a one-shot magnitude-8 offset on ceil(0.1*N) evenly spread token indices at
/// step 8.
CorruptionEvent default_corruption_event(const GeneratorConfig& generator);

/// Appends the default corruption event to cfg.generator.corruption_schedule.
void enable_default_corruption(ExperimentConfig& cfg);

} // namespace tokentrim::harness
