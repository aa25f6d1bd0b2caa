// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tokentrim/harness/compare.hpp"
#include "tokentrim/harness/config.hpp"
#include "tokentrim/harness/metrics.hpp"
#include "tokentrim/harness/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct RunOptions {
    std::string config_file;
    std::string preset = "tokentrim-default";
    std::vector<std::uint64_t> seeds;
    int steps = -1;
    bool corruption = false;
    std::string out_dir;
};

int do_run(const RunOptions& opts) {
    namespace hn = tokentrim::harness;
    hn::ExperimentConfig cfg = hn::preset_config(opts.preset);
    if (!opts.config_file.empty()) {
        std::ifstream in(opts.config_file);
        if (!in) {
            throw tokentrim::ConfigError("config: cannot open " + opts.config_file);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        hn::apply_json_overlay(cfg, buf.str());
    }
    if (!opts.seeds.empty()) {
        cfg.seeds = opts.seeds;
    }
    if (opts.steps > 0) {
        cfg.steps = opts.steps;
    }
    if (opts.corruption) {
        hn::enable_default_corruption(cfg);
    }
    hn::validate(cfg);

    const std::vector<hn::RunRecord> records = hn::run_experiment(cfg);
    hn::emit_metrics(cfg, records, opts.out_dir);

    std::printf("preset=%s hash=%s steps=%d seeds=%zu -> %s\n", cfg.preset_name.c_str(),
                hn::config_hash(cfg).c_str(), cfg.steps, cfg.seeds.size(),
                opts.out_dir.c_str());
    for (const hn::RunRecord& rec : records) {
        std::printf("  seed=%llu triggers=%d regen_rate=%.3f area=%.4f wall_ms=%.1f\n",
                    static_cast<unsigned long long>(rec.seed), rec.aggregates.trigger_count,
                    rec.aggregates.regeneration_rate,
                    rec.aggregates.cumulative_severity_area, rec.wall_ms);
    }
    return kExitOk;
}

int do_compare(const std::string& dir_a, const std::string& dir_b) {
    namespace hn = tokentrim::harness;
    const hn::CompareResult result = hn::compare_runs(dir_a, dir_b);
    std::fputs(hn::format_table(result).c_str(), stdout);
    return kExitOk;
}

int do_presets_list() {
    for (const auto& info : tokentrim::harness::list_presets()) {
        std::printf("%-22s %s\n", info.name.c_str(), info.description.c_str());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"drift-triggered KV-cache pruning: simulation harness"};
    app.require_subcommand(1);

    RunOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "run an experiment and emit metrics");
    run->add_option("--config", run_opts.config_file, "JSON config file overlaying the preset");
    run->add_option("--preset", run_opts.preset, "built-in preset name")
        ->default_val("tokentrim-default");
    run->add_option("--seed", run_opts.seeds, "seed(s); overrides the config seed list");
    run->add_option("--steps", run_opts.steps, "stream length; overrides the config");
    run->add_flag("--corruption", run_opts.corruption,
                  "inject the default corruption scenario");
    run->add_option("--out", run_opts.out_dir, "output directory")->required();

    std::string dir_a, dir_b;
    CLI::App* compare = app.add_subcommand("compare", "paired deltas between two run dirs");
    compare->add_option("a_dir", dir_a, "first run directory")->required();
    compare->add_option("b_dir", dir_b, "second run directory")->required();

    CLI::App* presets = app.add_subcommand("presets", "preset utilities");
    CLI::App* presets_list = presets->add_subcommand("list", "list built-in presets");
    presets->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            return do_run(run_opts);
        }
        if (compare->parsed()) {
            return do_compare(dir_a, dir_b);
        }
        if (presets->parsed() && presets_list->parsed()) {
            return do_presets_list();
        }
        std::fprintf(stderr, "no subcommand selected\n");
        return kExitConfigError;
    } catch (const tokentrim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
}
