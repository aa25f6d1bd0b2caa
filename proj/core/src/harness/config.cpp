// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokentrim/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tokentrim::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_known_fields(const json& j, const std::string& path,
                        std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known) {
            if (key == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            fail(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

template <typename T>
void read_field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path.empty() ? key : path + "." + std::string(key), e.what());
    }
}

json trigger_to_json(const TriggerConfig& t) {
    return json{{"lambda", t.lambda},
                {"warmup", t.warmup},
                {"fraction", t.fraction},
                {"max_regen", t.max_regen},
                {"enabled", t.enabled}};
}

void trigger_from_json(const json& j, TriggerConfig& t) {
    check_known_fields(j, "trigger", {"lambda", "warmup", "fraction", "max_regen", "enabled"});
    read_field(j, "trigger", "lambda", t.lambda);
    read_field(j, "trigger", "warmup", t.warmup);
    read_field(j, "trigger", "fraction", t.fraction);
    read_field(j, "trigger", "max_regen", t.max_regen);
    read_field(j, "trigger", "enabled", t.enabled);
}

const char* persistence_name(CorruptionPersistence p) {
    return p == CorruptionPersistence::one_shot ? "one-shot" : "recurring-via-context";
}

json event_to_json(const CorruptionEvent& ev) {
    return json{{"step", ev.step},
                {"token_indices", ev.token_indices},
                {"magnitude", ev.magnitude},
                {"persistence", persistence_name(ev.persistence)}};
}

CorruptionEvent event_from_json(const json& j, const std::string& path) {
    check_known_fields(j, path, {"step", "token_indices", "magnitude", "persistence"});
    CorruptionEvent ev;
    read_field(j, path, "step", ev.step);
    read_field(j, path, "token_indices", ev.token_indices);
    read_field(j, path, "magnitude", ev.magnitude);
    if (j.contains("persistence")) {
        const auto name = j.at("persistence").get<std::string>();
        if (name == "one-shot") {
            ev.persistence = CorruptionPersistence::one_shot;
        } else if (name == "recurring-via-context") {
            ev.persistence = CorruptionPersistence::recurring_via_context;
        } else {
            fail(path + ".persistence",
                 "expected 'one-shot' or 'recurring-via-context', got '" + name + "'");
        }
    }
    return ev;
}

json generator_to_json(const GeneratorConfig& g) {
    json events = json::array();
    for (const CorruptionEvent& ev : g.corruption_schedule) {
        events.push_back(event_to_json(ev));
    }
    return json{{"n_tokens", g.shape.n_tokens},
                {"dim", g.shape.dim},
                {"frames_per_chunk", g.frames_per_chunk},
                {"head_dim", g.head_dim},
                {"seed", g.seed},
                {"base_noise", g.base_noise},
                {"frame_jitter", g.frame_jitter},
                {"context_mix", g.context_mix},
                {"query_gain", g.query_gain},
                {"corruption_schedule", events}};
}

void generator_from_json(const json& j, GeneratorConfig& g) {
    check_known_fields(j, "generator",
                       {"n_tokens", "dim", "frames_per_chunk", "head_dim", "seed", "base_noise",
                        "frame_jitter", "context_mix", "query_gain", "corruption_schedule"});
    read_field(j, "generator", "n_tokens", g.shape.n_tokens);
    read_field(j, "generator", "dim", g.shape.dim);
    read_field(j, "generator", "frames_per_chunk", g.frames_per_chunk);
    read_field(j, "generator", "head_dim", g.head_dim);
    read_field(j, "generator", "seed", g.seed);
    read_field(j, "generator", "base_noise", g.base_noise);
    read_field(j, "generator", "frame_jitter", g.frame_jitter);
    read_field(j, "generator", "context_mix", g.context_mix);
    read_field(j, "generator", "query_gain", g.query_gain);
    if (j.contains("corruption_schedule")) {
        const json& events = j.at("corruption_schedule");
        if (!events.is_array()) {
            fail("generator.corruption_schedule", "expected an array");
        }
        g.corruption_schedule.clear();
        for (std::size_t i = 0; i < events.size(); ++i) {
            g.corruption_schedule.push_back(event_from_json(
                events[i], "generator.corruption_schedule[" + std::to_string(i) + "]"));
        }
    }
}

json layout_to_json(const CacheLayout& layout) {
    if (const auto* rolling = std::get_if<RollingLayout>(&layout)) {
        return json{{"type", "rolling"}, {"window_chunks", rolling->window_chunks}};
    }
    const auto& ar = std::get<AnchorRecentLayout>(layout);
    return json{{"type", "anchor-recent"},
                {"anchor_chunks", ar.anchor_chunks},
                {"recent_window", ar.recent_window}};
}

void layout_from_json(const json& j, CacheLayout& layout) {
    std::string type;
    if (const auto* rolling = std::get_if<RollingLayout>(&layout)) {
        (void)rolling;
        type = "rolling";
    } else {
        type = "anchor-recent";
    }
    read_field(j, "layout", "type", type);
    if (type == "rolling") {
        check_known_fields(j, "layout", {"type", "window_chunks"});
        RollingLayout rolling;
        if (const auto* prev = std::get_if<RollingLayout>(&layout)) {
            rolling = *prev;
        }
        read_field(j, "layout", "window_chunks", rolling.window_chunks);
        layout = rolling;
    } else if (type == "anchor-recent") {
        check_known_fields(j, "layout", {"type", "anchor_chunks", "recent_window"});
        AnchorRecentLayout ar;
        if (const auto* prev = std::get_if<AnchorRecentLayout>(&layout)) {
            ar = *prev;
        }
        read_field(j, "layout", "anchor_chunks", ar.anchor_chunks);
        read_field(j, "layout", "recent_window", ar.recent_window);
        layout = ar;
    } else {
        fail("layout.type", "expected 'rolling' or 'anchor-recent', got '" + type + "'");
    }
}

json init_to_json(const InitPolicy& init) {
    return json{{"mode", init.mode == InitMode::stabilized ? "stabilized" : "plain"},
                {"stabilized_noise_scale", init.stabilized_noise_scale}};
}

void init_from_json(const json& j, InitPolicy& init) {
    check_known_fields(j, "init", {"mode", "stabilized_noise_scale"});
    if (j.contains("mode")) {
        const auto name = j.at("mode").get<std::string>();
        if (name == "plain") {
            init.mode = InitMode::plain;
        } else if (name == "stabilized") {
            init.mode = InitMode::stabilized;
        } else {
            fail("init.mode", "expected 'plain' or 'stabilized', got '" + name + "'");
        }
    }
    read_field(j, "init", "stabilized_noise_scale", init.stabilized_noise_scale);
}

json config_to_json(const ExperimentConfig& cfg) {
    return json{{"preset_name", cfg.preset_name},
                {"steps", cfg.steps},
                {"seeds", cfg.seeds},
                {"trigger", trigger_to_json(cfg.trigger)},
                {"generator", generator_to_json(cfg.generator)},
                {"layout", layout_to_json(cfg.layout)},
                {"init", init_to_json(cfg.init)}};
}

void config_from_json(const json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) {
        fail("config", "expected a JSON object");
    }
    check_known_fields(j, "",
                       {"preset_name", "steps", "seeds", "trigger", "generator", "layout",
                        "init"});
    read_field(j, "", "preset_name", cfg.preset_name);
    read_field(j, "", "steps", cfg.steps);
    read_field(j, "", "seeds", cfg.seeds);
    if (j.contains("trigger")) {
        trigger_from_json(j.at("trigger"), cfg.trigger);
    }
    if (j.contains("generator")) {
        generator_from_json(j.at("generator"), cfg.generator);
    }
    if (j.contains("layout")) {
        layout_from_json(j.at("layout"), cfg.layout);
    }
    if (j.contains("init")) {
        init_from_json(j.at("init"), cfg.init);
    }
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

void validate(const ExperimentConfig& cfg) {
    tokentrim::validate(cfg.trigger);
    tokentrim::validate(cfg.generator);
    tokentrim::validate(cfg.layout);
    tokentrim::validate(cfg.init);
    if (cfg.steps < 1) {
        throw ConfigError("steps: must be >= 1, got " + std::to_string(cfg.steps));
    }
    if (cfg.seeds.empty()) {
        throw ConfigError("seeds: must be nonempty");
    }
    if (cfg.trigger.enabled && cfg.trigger.warmup == 0) {
        std::fprintf(stderr,
                     "warning: trigger.warmup=0 — with no accepted history the criterion "
                     "fires on any positive severity\n");
    }
}

std::string to_json_string(const ExperimentConfig& cfg, bool pretty) {
    return pretty ? config_to_json(cfg).dump(2) + "\n" : config_to_json(cfg).dump();
}

ExperimentConfig config_from_json_string(const std::string& text) {
    ExperimentConfig cfg;
    config_from_json(parse_text(text), cfg);
    return cfg;
}

void apply_json_overlay(ExperimentConfig& cfg, const std::string& text) {
    config_from_json(parse_text(text), cfg);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_string(buf.str());
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("config: cannot write " + path.string());
    }
    out << to_json_string(cfg, true);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(config_to_json(cfg).dump());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace tokentrim::harness
