// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/harness/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tokentrim/errors.hpp"

namespace tokentrim::harness {

using nlohmann::json;

namespace {

json load_summary(const std::filesystem::path& dir) {
    const auto path = dir / "summary.json";
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("compare: cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("compare: invalid JSON in " + path.string() + ": " + e.what());
    }
}

// Aggregates worth a paired comparison, in display order.
const char* const kComparedAggregates[] = {
    "trigger_count",         "regen_total",
    "regenerated_steps",     "regeneration_rate",
    "mean_severity_initial", "mean_severity_final",
    "cumulative_severity_area", "pruned_total",
    "alive_rows_sum",        "alive_rows_min",
    "final_alive_rows",
};

} // namespace

double sign_test_p_value(const std::vector<double>& deltas) {
    int n = 0;
    int positives = 0;
    for (double d : deltas) {
        if (d > 0.0) {
            ++n;
            ++positives;
        } else if (d < 0.0) {
            ++n;
        }
    }
    if (n == 0) {
        return 1.0;
    }
    // P(X <= k) for X ~ Binomial(n, 1/2), evaluated for the smaller tail.
    const int k = std::min(positives, n - positives);
    double coeff = 1.0; // C(n, 0)
    double tail = 1.0;  // sum of C(n, i) for i <= k
    for (int i = 1; i <= k; ++i) {
        coeff = coeff * static_cast<double>(n - i + 1) / static_cast<double>(i);
        tail += coeff;
    }
    const double p = 2.0 * tail * std::pow(0.5, n);
    return std::min(p, 1.0);
}

CompareResult compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b) {
    const json a = load_summary(dir_a);
    const json b = load_summary(dir_b);

    const auto seeds_a = a.at("seeds").get<std::vector<std::uint64_t>>();
    const auto seeds_b = b.at("seeds").get<std::vector<std::uint64_t>>();
    if (seeds_a != seeds_b) {
        throw ConfigError("compare: seed lists differ between " + dir_a.string() + " and " +
                          dir_b.string());
    }
    if (a.at("steps") != b.at("steps")) {
        throw ConfigError("compare: step counts differ between runs");
    }

    const json& per_a = a.at("aggregates").at("per_seed");
    const json& per_b = b.at("aggregates").at("per_seed");
    if (per_a.size() != seeds_a.size() || per_b.size() != seeds_a.size()) {
        throw ConfigError("compare: per-seed record count does not match seed list");
    }

    CompareResult result;
    result.seeds = seeds_a;
    for (const char* name : kComparedAggregates) {
        AggregateDelta delta;
        delta.name = name;
        double sum = 0.0;
        for (std::size_t i = 0; i < seeds_a.size(); ++i) {
            const double va = per_a[i].at(name).get<double>();
            const double vb = per_b[i].at(name).get<double>();
            delta.per_seed.push_back(vb - va);
            sum += vb - va;
        }
        delta.mean = sum / static_cast<double>(seeds_a.size());
        delta.sign_test_p = sign_test_p_value(delta.per_seed);
        result.deltas.push_back(std::move(delta));
    }
    return result;
}

std::string format_table(const CompareResult& result) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "paired deltas (b - a) over %zu seed(s)\n",
                  result.seeds.size());
    out << line;
    std::snprintf(line, sizeof(line), "%-26s %14s %14s %14s %10s\n", "aggregate", "mean",
                  "min", "max", "sign-p");
    out << line;
    for (const AggregateDelta& d : result.deltas) {
        const auto [mn, mx] = std::minmax_element(d.per_seed.begin(), d.per_seed.end());
        std::snprintf(line, sizeof(line), "%-26s %14.6g %14.6g %14.6g %10.4g\n",
                      d.name.c_str(), d.mean, *mn, *mx, d.sign_test_p);
        out << line;
    }
    return out.str();
}

} // namespace tokentrim::harness
