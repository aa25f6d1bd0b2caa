// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/harness/presets.hpp"

#include <cmath>

#include "tokentrim/latent.hpp"

namespace tokentrim::harness {

namespace {

ExperimentConfig tokentrim_base() {
    ExperimentConfig cfg;
    cfg.trigger = TriggerConfig{}; // fraction 0.1, lambda 2.0, warmup 2, max_regen 1
    cfg.layout = RollingLayout{4};
    cfg.init = InitPolicy{InitMode::stabilized, 0.5};
    cfg.steps = 30;
    cfg.seeds = {1};
    return cfg;
}

} // namespace

std::vector<PresetInfo> list_presets() {
    return {
        {"baseline", "no pruning; detector runs for logging only; plain init"},
        {"tokentrim-default", "10% pruning, lambda 2.0, warmup 2, 1 regeneration, stabilized init"},
        {"tokentrim-5pct", "tokentrim-default with 5% pruning"},
        {"tokentrim-20pct", "tokentrim-default with 20% pruning"},
        {"tokentrim-plain-init", "tokentrim-default without the stabilized first chunk"},
    };
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg = tokentrim_base();
    cfg.preset_name = name;
    if (name == "baseline") {
        cfg.trigger.enabled = false;
        cfg.init = InitPolicy{InitMode::plain, 0.5};
        return cfg;
    }
    if (name == "tokentrim-default") {
        return cfg;
    }
    if (name == "tokentrim-5pct") {
        cfg.trigger.fraction = 0.05;
        return cfg;
    }
    if (name == "tokentrim-20pct") {
        cfg.trigger.fraction = 0.20;
        return cfg;
    }
    if (name == "tokentrim-plain-init") {
        cfg.init = InitPolicy{InitMode::plain, 0.5};
        return cfg;
    }
    throw ConfigError("preset: unknown name '" + name + "'");
}

CorruptionEvent default_corruption_event(const GeneratorConfig& generator) {
    CorruptionEvent ev;
    ev.step = 8;
    ev.magnitude = 8.0;
    ev.persistence = CorruptionPersistence::one_shot;
    const std::size_t n = generator.shape.n_tokens;
    const std::size_t count = unstable_count(n, 0.1);
    for (std::size_t j = 0; j < count; ++j) {
        ev.token_indices.push_back(j * n / count);
    }
    return ev;
}

void enable_default_corruption(ExperimentConfig& cfg) {
    cfg.generator.corruption_schedule.push_back(default_corruption_event(cfg.generator));
}

} // namespace tokentrim::harness
