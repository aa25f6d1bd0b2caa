// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: every check runs on one CPU core with its tolerance and
// runtime budget pinned in code, and prints exactly one PASS/FAIL line.
// TOKENTRIM_UPDATE_GOLDEN=1 rewrites the golden files instead of checking
// them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tokentrim/controller.hpp"
#include "tokentrim/harness/compare.hpp"
#include "tokentrim/harness/config.hpp"
#include "tokentrim/harness/experiment.hpp"
#include "tokentrim/harness/metrics.hpp"
#include "tokentrim/harness/presets.hpp"
#include "tokentrim/rng.hpp"
#include "tokentrim/simgen.hpp"
#include "support/oracles.hpp"
#include "support/scripted_generator.hpp"

using namespace tokentrim;
using namespace tokentrim::harness;
namespace tt = tokentrim::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            detail = msg;
        }
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1
// Equation fidelity vs brute-force oracles: per-row norms, full-sort top-k,
// selected-set mean, batch mean/std. 1000 randomized instances each, N <= 64,
// relative tolerance 1e-9.
Check equation_fidelity() {
    Check c;
    std::mt19937_64 rng(20260810);
    GaussianSource g(20260810);

    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 63);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 16);
        const Eigen::MatrixXd prev = g.matrix(n, d);
        const Eigen::MatrixXd curr = g.matrix(n, d);
        const TokenGridShape shape{static_cast<std::size_t>(n), static_cast<std::size_t>(d)};
        const Eigen::VectorXd drift = per_token_drift(LatentSummary{shape, curr, 2, 1},
                                                      LatentSummary{shape, prev, 1, 1});
        const Eigen::VectorXd want = tt::naive_row_norms(curr - prev);
        for (Eigen::Index i = 0; i < n; ++i) {
            c.require(tt::rel_err(drift(i), want(i)) < 1e-9, "per-token drift off oracle");
        }

        double fraction = 0.05 + uniform01(rng) * 0.85;
        std::size_t k = 0;
        try {
            k = unstable_count(static_cast<std::size_t>(n), fraction);
        } catch (const ConfigError&) {
            fraction = 0.4;
            k = unstable_count(static_cast<std::size_t>(n), fraction);
        }
        const DriftProfile profile = build_drift_profile(drift, fraction);
        c.require(profile.selected == tt::full_sort_top_k(drift, k),
                  "selected set differs from full-sort oracle");
        double sum = 0.0;
        for (std::size_t idx : profile.selected) {
            sum += drift(static_cast<Eigen::Index>(idx));
        }
        c.require(tt::rel_err(profile.severity, sum / static_cast<double>(k)) < 1e-9,
                  "severity differs from selected-set mean");
    }

    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        const int len = 1 + static_cast<int>(rng() % 64);
        RunningStats stats;
        std::vector<double> history;
        for (int i = 0; i < len; ++i) {
            const double x = uniform01(rng) * 10.0;
            history.push_back(x);
            stats = stats.accepted(x);
        }
        const auto [mean, std] = tt::batch_mean_std(history);
        c.require(tt::rel_err(stats.mean(), mean) < 1e-9, "running mean off batch formula");
        if (std > 1e-12) {
            c.require(tt::rel_err(stats.std(), std) < 1e-9, "running std off batch formula");
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 2
// Physically pruned attention context == full context with -inf logits at
// pruned rows, 500 randomized caches, 1e-9 elementwise.
Check masking_equivalence() {
    Check c;
    std::mt19937_64 rng(7070);
    GaussianSource g(7070);
    for (int trial = 0; trial < 500 && c.ok; ++trial) {
        const std::size_t n = 2 + rng() % 15; // N <= 16
        const std::size_t d = 1 + rng() % 8;
        const std::size_t entries = 1 + rng() % 4;
        const bool anchored = trial % 3 == 0;
        CacheLayout layout = anchored ? CacheLayout{AnchorRecentLayout{1, 3}}
                                      : CacheLayout{RollingLayout{4}};
        KVCache cache(layout, TokenGridShape{n, d}, d);
        for (std::size_t e = 0; e < entries; ++e) {
            cache.append_chunk(g.matrix(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(d)),
                               g.matrix(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(d)),
                               static_cast<int>(e) + 1);
        }
        const auto [full_k, full_v] = cache.assemble_cached();

        // Two composed masks; one index is reserved so the context never
        // empties out entirely.
        const std::size_t reserved = rng() % n;
        for (int mask_round = 0; mask_round < 2; ++mask_round) {
            std::vector<std::size_t> selected;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != reserved && uniform01(rng) < 0.35) {
                    selected.push_back(i);
                }
            }
            cache.apply_prune(PruneMask::from_selected(selected, n));
        }

        std::vector<bool> alive;
        for (const CacheEntry& e : cache.entries()) {
            alive.insert(alive.end(), e.alive.begin(), e.alive.end());
        }
        const auto [pk, pv] = cache.assemble_cached();
        const Eigen::MatrixXd q =
            g.matrix(1 + static_cast<Eigen::Index>(rng() % 6), static_cast<Eigen::Index>(d));
        const Eigen::MatrixXd got = attention(q, pk, pv, d);
        const Eigen::MatrixXd want = tt::naive_attention(q, full_k, full_v, d, &alive);
        const double err = (got - want).cwiseAbs().maxCoeff();
        c.require(err < 1e-9, "pruned vs masked attention differ by " + fmt(err));
    }
    return c;
}

// ---------------------------------------------------------------- criterion 3
// Hand-derived step trace: warm-up severities 1.0, 1.0, then a severity-9
// candidate against threshold mu + lambda*sigma = 1.0.
Check trace_conformance() {
    Check c;
    const TokenGridShape shape{64, 4};
    Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(64, 4);
    const auto shifted = [](Eigen::MatrixXd m, double offset) {
        m.col(0).array() += offset;
        return m;
    };
    tt::ScriptedGenerator gen(shape, a1);
    const Eigen::MatrixXd a2 = shifted(a1, 1.0);
    const Eigen::MatrixXd a3 = shifted(a2, 1.0);
    gen.script(2, a2);
    gen.script(3, a3);
    gen.script(4, shifted(a3, 9.0));
    gen.script(4, shifted(a3, 0.5));

    const StreamResult r = run_stream(gen, TriggerConfig{}, RollingLayout{4}, 4);
    c.require(r.outcomes.size() == 4, "expected 4 outcomes");
    if (!c.ok) {
        return c;
    }
    const auto& o = r.outcomes;
    c.require(o[0].step == 1 && o[0].accepted_via == AcceptedVia::warmup, "init record");
    c.require(!o[1].triggered && o[1].accepted_via == AcceptedVia::warmup &&
                  o[1].severity_initial == 1.0,
              "step 2 must be an untriggered warm-up severity of 1.0");
    c.require(!o[2].triggered && o[2].accepted_via == AcceptedVia::warmup &&
                  o[2].severity_initial == 1.0 && o[2].threshold == 1.0,
              "step 3 must be an untriggered warm-up severity of 1.0");
    c.require(o[3].triggered, "spike step must trigger");
    c.require(o[3].threshold == 1.0, "threshold must be exactly 1.0 (mu 1.0, sigma 0)");
    c.require(o[3].severity_initial == 9.0, "candidate severity must be 9.0");
    c.require(o[3].pruned_indices.size() == 7, "ceil(0.1*64) = 7 pruned indices");
    for (std::size_t i = 0; i < o[3].pruned_indices.size() && c.ok; ++i) {
        c.require(o[3].pruned_indices[i] == i, "tie-break must select lowest indices");
    }
    c.require(o[3].regen_count == 1, "regeneration must run exactly once");
    c.require(o[3].accepted_via == AcceptedVia::regenerated, "regenerated batch accepted");
    c.require(o[3].severity_final == 0.5, "accepted severity must be 0.5");
    c.require(gen.calls == 4, "generator must be called once per step plus one retry");
    return c;
}

// ---------------------------------------------------------------- criterion 4
// With corruption disabled and lambda raised to 1e6, the gated run is bitwise
// identical to the detector-disabled baseline: frames, cache, statistics.
Check transparency() {
    Check c;
    for (std::uint64_t seed = 1; seed <= 10 && c.ok; ++seed) {
        GeneratorConfig gc; // default 64x16 grid
        gc.seed = seed;

        TriggerConfig off;
        off.enabled = false;
        SimGenerator gen_off(gc, InitPolicy{});
        const StreamResult base = run_stream(gen_off, off, RollingLayout{4}, 100);

        TriggerConfig sky;
        sky.lambda = 1e6;
        SimGenerator gen_sky(gc, InitPolicy{});
        const StreamResult run = run_stream(gen_sky, sky, RollingLayout{4}, 100);

        for (std::size_t s = 0; s < base.frames.size() && c.ok; ++s) {
            c.require(!run.outcomes[s].triggered, "no step may trigger at lambda=1e6");
            for (std::size_t f = 0; f < base.frames[s].size() && c.ok; ++f) {
                c.require(tt::bitwise_equal(base.frames[s][f].values,
                                            run.frames[s][f].values),
                          "frames diverged at step " + std::to_string(s + 1));
            }
        }
        c.require(base.cache.entries().size() == run.cache.entries().size(),
                  "cache entry counts differ");
        for (std::size_t e = 0; e < base.cache.entries().size() && c.ok; ++e) {
            c.require(tt::bitwise_equal(base.cache.entries()[e].keys,
                                        run.cache.entries()[e].keys) &&
                          tt::bitwise_equal(base.cache.entries()[e].values,
                                            run.cache.entries()[e].values) &&
                          base.cache.entries()[e].alive == run.cache.entries()[e].alive,
                      "cache contents diverged");
        }
        c.require(base.stats.count() == run.stats.count() &&
                      base.stats.mean() == run.stats.mean() &&
                      base.stats.std() == run.stats.std(),
                  "statistics diverged");
    }
    return c;
}

// ---------------------------------------------------------------- criterion 5
// Default corruption scenario, 100 paired seeds: the trigger lands within two
// steps of the injection in >= 95, and the post-injection severity area is
// lower with the controller than without in >= 90.
Check detection_and_mitigation() {
    Check c;
    const int kSeeds = 100;
    int detected = 0;
    int mitigated = 0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        ExperimentConfig trimmed = preset_config("tokentrim-default");
        trimmed.steps = 30;
        enable_default_corruption(trimmed);
        const int inject = trimmed.generator.corruption_schedule.back().step;

        ExperimentConfig baseline = preset_config("baseline");
        baseline.steps = 30;
        enable_default_corruption(baseline);

        const StreamResult rt = run_single(trimmed, static_cast<std::uint64_t>(seed));
        const StreamResult rb = run_single(baseline, static_cast<std::uint64_t>(seed));

        for (const StepOutcome& o : rt.outcomes) {
            if (o.triggered && o.step >= inject && o.step <= inject + 1) {
                ++detected;
                break;
            }
        }
        double area_t = 0.0, area_b = 0.0;
        for (std::size_t s = static_cast<std::size_t>(inject) - 1; s < rt.outcomes.size();
             ++s) {
            area_t += rt.outcomes[s].severity_final;
            area_b += rb.outcomes[s].severity_final;
        }
        if (area_t < area_b) {
            ++mitigated;
        }
    }
    c.require(detected >= 95, "trigger within 2 steps of injection in only " +
                                  std::to_string(detected) + "/100 seeds");
    c.require(mitigated >= 90, "post-injection area lower in only " +
                                   std::to_string(mitigated) + "/100 seeds");
    c.detail = "detected " + std::to_string(detected) + "/100, mitigated " +
               std::to_string(mitigated) + "/100" + (c.ok ? "" : "; " + c.detail);
    return c;
}

// ---------------------------------------------------------------- criterion 6
// i.i.d. Gaussian severities, lambda 2.0, 100000 steps: empirical trigger rate
// inside the one-sided 2-sigma band [0.8%, 4.5%].
Check trigger_rate_sanity() {
    Check c;
    GaussianSource g(13371337);
    RunningStats stats;
    const TriggerConfig cfg; // lambda 2.0, warmup 2
    const int kSteps = 100000;
    int triggers = 0;
    int gated = 0;
    for (int step = 1; step <= kSteps; ++step) {
        const double severity = 10.0 + g.next(); // comfortably positive
        const TriggerDecision d = should_trigger(stats, severity, step, cfg);
        if (step > cfg.warmup) {
            ++gated;
            if (d.triggered) {
                ++triggers;
            }
        }
        stats = stats.accepted(severity);
    }
    const double rate = static_cast<double>(triggers) / static_cast<double>(gated);
    c.require(rate >= 0.008 && rate <= 0.045,
              "trigger rate " + fmt(rate) + " outside [0.008, 0.045]");
    c.detail = "rate " + fmt(rate) + (c.ok ? "" : "; " + c.detail);
    return c;
}

// ---------------------------------------------------------------- criterion 7
// Ablation directions over 100 seeds: 20% pruning retains strictly fewer
// context rows and lands farther from the clean reference than 10%; skipping
// the stabilized first chunk is worse over the early steps.
Check ablation_direction() {
    Check c;
    const int kSeeds = 100;
    int twenty_worse = 0;
    int plain_worse = 0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        const auto configured = [&](const char* preset) {
            ExperimentConfig cfg = preset_config(preset);
            cfg.steps = 30;
            enable_default_corruption(cfg);
            return run_single(cfg, static_cast<std::uint64_t>(seed));
        };
        // Clean reference: same dynamics and init, no corruption, no gating.
        ExperimentConfig ref_cfg = preset_config("tokentrim-default");
        ref_cfg.steps = 30;
        ref_cfg.trigger.enabled = false;
        const StreamResult ref = run_single(ref_cfg, static_cast<std::uint64_t>(seed));

        const StreamResult r10 = configured("tokentrim-default");
        const StreamResult r20 = configured("tokentrim-20pct");
        const StreamResult rp = configured("tokentrim-plain-init");

        // Retained context at the injection trigger itself: the row budget
        // right after each preset's prune responds to the corruption.
        const int inject = 8;
        const auto rows_at_injection_trigger = [inject](const StreamResult& r) -> long long {
            for (const StepOutcome& o : r.outcomes) {
                if (o.triggered && o.step >= inject && o.step <= inject + 1) {
                    return static_cast<long long>(o.alive_rows);
                }
            }
            return -1; // injection never caught
        };
        const long long rows10 = rows_at_injection_trigger(r10);
        const long long rows20 = rows_at_injection_trigger(r20);
        const double fid10 =
            (r10.summaries.back().values - ref.summaries.back().values).norm();
        const double fid20 =
            (r20.summaries.back().values - ref.summaries.back().values).norm();
        if (rows10 > 0 && rows20 > 0 && rows20 < rows10 && fid20 > fid10) {
            ++twenty_worse;
        }

        // Early-chunk fidelity: distance from the noise-free trajectory
        // (identically zero latents) over the first three chunks.
        double early_stab = 0.0, early_plain = 0.0;
        for (int s = 0; s < 3; ++s) {
            early_stab += r10.summaries[static_cast<std::size_t>(s)].values.norm();
            early_plain += rp.summaries[static_cast<std::size_t>(s)].values.norm();
        }
        if (early_plain > early_stab) {
            ++plain_worse;
        }
    }
    c.require(twenty_worse >= 80, "20% pruning worse in only " +
                                      std::to_string(twenty_worse) + "/100 seeds");
    c.require(plain_worse >= 80, "plain init worse in only " + std::to_string(plain_worse) +
                                     "/100 seeds");
    c.detail = "20% worse " + std::to_string(twenty_worse) + "/100, plain-init worse " +
               std::to_string(plain_worse) + "/100" + (c.ok ? "" : "; " + c.detail);
    return c;
}

// ---------------------------------------------------------------- criterion 8
// Anchor immunity: 200 appended chunks under adversarial per-step masks never
// cost anchor entries a single row in any assembled context.
Check anchor_immunity() {
    Check c;
    std::mt19937_64 rng(888);
    GaussianSource g(888);
    const std::size_t n = 16, d = 8;
    KVCache cache(AnchorRecentLayout{1, 3}, TokenGridShape{n, d}, d);
    for (int step = 1; step <= 200 && c.ok; ++step) {
        cache.append_chunk(
            g.matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)),
            g.matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)), step);
        std::vector<std::size_t> selected;
        for (std::size_t i = 0; i < n; ++i) {
            if (uniform01(rng) < 0.5 && selected.size() + 1 < n) {
                selected.push_back(i);
            }
        }
        cache.apply_prune(PruneMask::from_selected(selected, n));

        std::size_t anchor_rows = 0;
        std::size_t expected = 0;
        for (const CacheEntry& e : cache.entries()) {
            expected += e.alive_count();
            if (e.anchor) {
                anchor_rows += e.alive_count();
            }
        }
        const auto [keys, values] = cache.assemble_cached();
        c.require(anchor_rows == n, "anchor lost rows at step " + std::to_string(step));
        c.require(static_cast<std::size_t>(keys.rows()) == expected,
                  "row budget violated at step " + std::to_string(step));
    }
    return c;
}

// ---------------------------------------------------------------- criterion 9
// Byte-identical CSV/JSON across two consecutive runs for three presets, plus
// a regression check against the checked-in golden files.
Check reproducibility() {
    Check c;
    const bool update =
        std::getenv("TOKENTRIM_UPDATE_GOLDEN") != nullptr &&
        std::string(std::getenv("TOKENTRIM_UPDATE_GOLDEN")) == "1";
    const fs::path golden_root = TOKENTRIM_GOLDEN_DIR;
    const fs::path work = fs::temp_directory_path() / "tokentrim_acceptance_golden";
    fs::remove_all(work);

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    for (const char* preset : {"baseline", "tokentrim-default", "tokentrim-20pct"}) {
        ExperimentConfig cfg = preset_config(preset);
        cfg.steps = 12;
        cfg.seeds = {1, 2};
        enable_default_corruption(cfg);

        const fs::path dir_a = work / preset / "a";
        const fs::path dir_b = work / preset / "b";
        emit_metrics(cfg, run_experiment(cfg), dir_a);
        emit_metrics(cfg, run_experiment(cfg), dir_b);
        for (const char* name : {"metrics.csv", "summary.json", "config.json"}) {
            c.require(slurp(dir_a / name) == slurp(dir_b / name),
                      std::string(preset) + "/" + name + " differs between runs");
        }

        const fs::path golden_dir = golden_root / preset;
        if (update) {
            fs::create_directories(golden_dir);
            for (const char* name : {"metrics.csv", "summary.json", "config.json"}) {
                fs::copy_file(dir_a / name, golden_dir / name,
                              fs::copy_options::overwrite_existing);
            }
            continue;
        }
        for (const char* name : {"metrics.csv", "summary.json", "config.json"}) {
            c.require(fs::exists(golden_dir / name),
                      "missing golden file " + (golden_dir / name).string());
            if (c.ok) {
                c.require(slurp(dir_a / name) == slurp(golden_dir / name),
                          std::string(preset) + "/" + name + " diverges from golden");
            }
        }
    }
    if (update && c.ok) {
        c.detail = "golden files rewritten";
    }
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Check()> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "equation fidelity vs brute-force oracles (1e-9)", 5.0, equation_fidelity},
        {2, "masking equivalence, pruned vs -inf logits (1e-9)", 10.0, masking_equivalence},
        {3, "hand-derived step-trace conformance", 1.0, trace_conformance},
        {4, "transparency: disabled vs lambda=1e6, bitwise", 10.0, transparency},
        {5, "corruption detection and mitigation", 60.0, detection_and_mitigation},
        {6, "trigger-rate sanity over 100000 i.i.d. steps", 10.0, trigger_rate_sanity},
        {7, "ablation directions (20% pruning, plain init)", 60.0, ablation_direction},
        {8, "anchor immunity under adversarial masks", 5.0, anchor_immunity},
        {9, "byte-identical metrics across runs and goldens", 5.0, reproducibility},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check result;
        try {
            result = cr.fn();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > cr.budget_s) {
            result.ok = false;
            result.detail += (result.detail.empty() ? "" : "; ") + std::string("over ") +
                             fmt(cr.budget_s) + "s budget";
        }
        std::printf("[%s] %d. %s (%.2fs)%s%s\n", result.ok ? "PASS" : "FAIL", cr.id, cr.name,
                    elapsed, result.detail.empty() ? "" : " — ", result.detail.c_str());
        if (!result.ok) {
            ++failures;
        }
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
