// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tokentrim::harness {

/// Per-aggregate paired comparison across matching seeds: deltas are b - a.
struct AggregateDelta {
    std::string name;
    std::vector<double> per_seed;
    double mean = 0.0;
    double sign_test_p = 1.0; // two-sided exact binomial sign test, zeros dropped
};

struct CompareResult {
    std::vector<std::uint64_t> seeds;
    std::vector<AggregateDelta> deltas;
};

/// Loads summary.json from both run directories. Throws ConfigError when the
/// seed lists or step counts do not match.
CompareResult compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b);

/// Fixed-width text table: one row per aggregate with per-seed deltas folded
/// into mean / min / max plus the sign-test p-value.
std::string format_table(const CompareResult& result);

/// Exact two-sided binomial sign test on paired deltas (zeros dropped).
double sign_test_p_value(const std::vector<double>& deltas);

} // namespace tokentrim::harness
