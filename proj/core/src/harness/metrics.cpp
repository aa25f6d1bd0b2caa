// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/harness/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tokentrim/harness/config.hpp"

namespace tokentrim::harness {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json aggregates_to_json(const RunAggregates& a) {
    return json{{"steps", a.steps},
                {"comparison_steps", a.comparison_steps},
                {"trigger_count", a.trigger_count},
                {"regen_total", a.regen_total},
                {"regenerated_steps", a.regenerated_steps},
                {"regeneration_rate", a.regeneration_rate},
                {"mean_severity_initial", a.mean_severity_initial},
                {"mean_severity_final", a.mean_severity_final},
                {"cumulative_severity_area", a.cumulative_severity_area},
                {"pruned_total", a.pruned_total},
                {"alive_rows_sum", a.alive_rows_sum},
                {"alive_rows_min", a.alive_rows_min},
                {"final_alive_rows", a.final_alive_rows}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("emit_metrics: cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw Error("emit_metrics: write failed for " + path.string());
    }
}

} // namespace

void emit_metrics(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                  const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error("emit_metrics: cannot create directory " + dir.string() + ": " +
                    ec.message());
    }

    std::ostringstream csv;
    csv << kCsvHeader << "\n";
    for (const RunRecord& rec : records) {
        for (const StepOutcome& o : rec.outcomes) {
            char line[256];
            std::snprintf(line, sizeof(line), "%llu,%d,%s,%s,%d,%d,%s,%llu,%llu\n",
                          static_cast<unsigned long long>(rec.seed), o.step,
                          fmt_double(o.severity_initial).c_str(),
                          fmt_double(o.threshold).c_str(), o.triggered ? 1 : 0, o.regen_count,
                          fmt_double(o.severity_final).c_str(),
                          static_cast<unsigned long long>(o.pruned_indices.size()),
                          static_cast<unsigned long long>(o.alive_rows));
            csv << line;
        }
    }
    write_file(dir / "metrics.csv", csv.str());

    json per_seed = json::array();
    RunAggregates mean_acc;
    double mean_rate = 0.0, mean_sev_i = 0.0, mean_sev_f = 0.0, mean_area = 0.0;
    for (const RunRecord& rec : records) {
        json j = aggregates_to_json(rec.aggregates);
        j["seed"] = rec.seed;
        per_seed.push_back(std::move(j));
        mean_acc.trigger_count += rec.aggregates.trigger_count;
        mean_acc.regen_total += rec.aggregates.regen_total;
        mean_acc.regenerated_steps += rec.aggregates.regenerated_steps;
        mean_rate += rec.aggregates.regeneration_rate;
        mean_sev_i += rec.aggregates.mean_severity_initial;
        mean_sev_f += rec.aggregates.mean_severity_final;
        mean_area += rec.aggregates.cumulative_severity_area;
    }
    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    const json mean{{"trigger_count", mean_acc.trigger_count / n},
                    {"regen_total", mean_acc.regen_total / n},
                    {"regenerated_steps", mean_acc.regenerated_steps / n},
                    {"regeneration_rate", mean_rate / n},
                    {"mean_severity_initial", mean_sev_i / n},
                    {"mean_severity_final", mean_sev_f / n},
                    {"cumulative_severity_area", mean_area / n}};

    const json summary{{"schema_version", kSchemaVersion},
                       {"config_hash", config_hash(cfg)},
                       {"preset_name", cfg.preset_name},
                       {"steps", cfg.steps},
                       {"seeds", cfg.seeds},
                       {"trigger",
                        json{{"fraction", cfg.trigger.fraction},
                             {"lambda", cfg.trigger.lambda},
                             {"warmup", cfg.trigger.warmup},
                             {"max_regen", cfg.trigger.max_regen},
                             {"enabled", cfg.trigger.enabled}}},
                       {"aggregates", json{{"per_seed", per_seed}, {"mean", mean}}}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    write_file(dir / "config.json", to_json_string(cfg, true));
}

std::vector<StepRow> load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("load_metrics_csv: cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("load_metrics_csv: empty file " + path.string());
    }
    if (line != kCsvHeader) {
        throw Error("load_metrics_csv: unexpected header in " + path.string());
    }
    std::vector<StepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        StepRow row;
        unsigned long long seed = 0, pruned = 0, alive = 0;
        const int got = std::sscanf(line.c_str(), "%llu,%d,%lf,%lf,%d,%d,%lf,%llu,%llu", &seed,
                                    &row.step, &row.severity_initial, &row.threshold,
                                    &row.triggered, &row.regen_count, &row.severity_final,
                                    &pruned, &alive);
        if (got != 9) {
            throw Error("load_metrics_csv: malformed row at " + path.string() + ":" +
                        std::to_string(line_no));
        }
        row.seed = seed;
        row.pruned_count = static_cast<long long>(pruned);
        row.alive_rows = static_cast<long long>(alive);
        rows.push_back(row);
    }
    return rows;
}

RunAggregates aggregates_from_rows(const std::vector<StepRow>& rows) {
    RunAggregates agg;
    agg.steps = static_cast<int>(rows.size());
    bool first = true;
    for (const StepRow& r : rows) {
        agg.pruned_total += r.pruned_count;
        agg.alive_rows_sum += r.alive_rows;
        agg.alive_rows_min = first ? r.alive_rows : std::min(agg.alive_rows_min, r.alive_rows);
        agg.final_alive_rows = r.alive_rows;
        first = false;
        if (r.step < 2) {
            continue;
        }
        ++agg.comparison_steps;
        if (r.triggered != 0) {
            ++agg.trigger_count;
        }
        agg.regen_total += r.regen_count;
        if (r.regen_count > 0) {
            ++agg.regenerated_steps;
        }
        agg.mean_severity_initial += r.severity_initial;
        agg.mean_severity_final += r.severity_final;
        agg.cumulative_severity_area += r.severity_final;
    }
    if (agg.comparison_steps > 0) {
        agg.mean_severity_initial /= agg.comparison_steps;
        agg.mean_severity_final /= agg.comparison_steps;
        agg.regeneration_rate =
            static_cast<double>(agg.regenerated_steps) / agg.comparison_steps;
    }
    return agg;
}

} // namespace tokentrim::harness
