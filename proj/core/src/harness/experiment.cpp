// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "tokentrim/simgen.hpp"

namespace tokentrim::harness {

RunAggregates compute_aggregates(const std::vector<StepOutcome>& outcomes) {
    RunAggregates agg;
    agg.steps = static_cast<int>(outcomes.size());
    bool first = true;
    for (const StepOutcome& o : outcomes) {
        agg.pruned_total += static_cast<long long>(o.pruned_indices.size());
        const auto alive = static_cast<long long>(o.alive_rows);
        agg.alive_rows_sum += alive;
        agg.alive_rows_min = first ? alive : std::min(agg.alive_rows_min, alive);
        agg.final_alive_rows = alive;
        first = false;
        if (o.step < 2) {
            continue;
        }
        ++agg.comparison_steps;
        if (o.triggered) {
            ++agg.trigger_count;
        }
        agg.regen_total += o.regen_count;
        if (o.regen_count > 0) {
            ++agg.regenerated_steps;
        }
        agg.mean_severity_initial += o.severity_initial;
        agg.mean_severity_final += o.severity_final;
        agg.cumulative_severity_area += o.severity_final;
    }
    if (agg.comparison_steps > 0) {
        agg.mean_severity_initial /= agg.comparison_steps;
        agg.mean_severity_final /= agg.comparison_steps;
        agg.regeneration_rate =
            static_cast<double>(agg.regenerated_steps) / agg.comparison_steps;
    }
    return agg;
}

StreamResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    GeneratorConfig gen_cfg = cfg.generator;
    gen_cfg.seed = seed;
    SimGenerator gen(gen_cfg, cfg.init);
    return run_stream(gen, cfg.trigger, cfg.layout, cfg.steps);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const std::size_t n = cfg.seeds.size();
    std::vector<RunRecord> records(n);

    const auto run_one = [&cfg, &records](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const auto t0 = std::chrono::steady_clock::now();
        StreamResult stream = run_single(cfg, seed);
        const auto t1 = std::chrono::steady_clock::now();

        RunRecord rec;
        rec.seed = seed;
        rec.outcomes = std::move(stream.outcomes);
        rec.aggregates = compute_aggregates(rec.outcomes);
        rec.final_summary = stream.summaries.back().values;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        records[i] = std::move(rec);
    };

    std::size_t workers = std::thread::hardware_concurrency();
    if (workers == 0) {
        workers = 1;
    }
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_one(i);
        }
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) {
                    return;
                }
                try {
                    run_one(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return records;
}

} // namespace tokentrim::harness
