// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tokentrim/drift.hpp"
#include "tokentrim/kvcache.hpp"
#include "tokentrim/simgen.hpp"

namespace tokentrim::harness {

/// Full description of one experiment: trigger settings, generator dynamics,
/// cache layout, init policy, run length, and the seed list. generator.seed is
/// a base value; run_experiment() overrides it per entry of `seeds`.
struct ExperimentConfig {
    TriggerConfig trigger;
    GeneratorConfig generator;
    CacheLayout layout = RollingLayout{4};
    InitPolicy init;
    int steps = 30;
    std::vector<std::uint64_t> seeds = {1};
    std::string preset_name;
};

/// Validates every section; error messages carry the offending field path.
/// Warns on stderr when warmup=0 is configured with the trigger enabled
/// (the criterion then fires on any positive severity until statistics exist).
void validate(const ExperimentConfig& cfg);

/// Serialized form (JSON). parse/apply reject unknown fields.
std::string to_json_string(const ExperimentConfig& cfg, bool pretty = true);
ExperimentConfig config_from_json_string(const std::string& text);

/// Overlays a partial JSON document (e.g. a config file over a preset).
void apply_json_overlay(ExperimentConfig& cfg, const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// FNV-1a 64 over the canonical serialized config; stable across runs.
std::string config_hash(const ExperimentConfig& cfg);

} // namespace tokentrim::harness
