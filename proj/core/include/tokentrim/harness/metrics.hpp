// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tokentrim/harness/experiment.hpp"

namespace tokentrim::harness {

/// Fixed per-step CSV schema; the header line is part of the contract.
inline constexpr const char* kCsvHeader =
    "seed,step,severity_initial,threshold,triggered,regen_count,severity_final,"
    "pruned_count,alive_rows";

inline constexpr const char* kSchemaVersion = "1";

/// One parsed CSV row.
struct StepRow {
    std::uint64_t seed = 0;
    int step = 0;
    double severity_initial = 0.0;
    double threshold = 0.0;
    int triggered = 0;
    int regen_count = 0;
    double severity_final = 0.0;
    long long pruned_count = 0;
    long long alive_rows = 0;
};

/// Writes metrics.csv (all seeds), summary.json (schema_version, config hash,
/// per-seed aggregates, cross-seed means), and config.json (the effective
/// config) into `dir`, creating it if needed. Output is byte-reproducible per
/// (config, seed). I/O failures carry the path in the message.
void emit_metrics(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                  const std::filesystem::path& dir);

std::vector<StepRow> load_metrics_csv(const std::filesystem::path& path);

/// Recomputes RunAggregates from one seed's CSV rows; the accumulation order
/// matches emit-time exactly, so equality is exact.
RunAggregates aggregates_from_rows(const std::vector<StepRow>& rows);

} // namespace tokentrim::harness
