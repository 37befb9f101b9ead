#include "snipcorr/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

#include <nlohmann/json.hpp>

#include "snipcorr/error.hpp"

namespace snipcorr::config {

using nlohmann::json;
using hydro::DofCoefficients;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

std::size_t SeaStateEntry::first_index(Split s) const {
    switch (s) {
        case Split::train: return 0;
        case Split::validation: return splits.train;
        case Split::test: return splits.train + splits.validation;
    }
    return 0;
}

std::size_t SeaStateEntry::count(Split s) const {
    switch (s) {
        case Split::train: return splits.train;
        case Split::validation: return splits.validation;
        case Split::test: return splits.test;
    }
    return 0;
}

const SeaStateEntry& ExperimentConfig::sea_state(const std::string& label) const {
    for (const auto& s : sea_states)
        if (s.label == label) return s;
    throw ConfigError("unknown sea state label '" + label + "'");
}

void ExperimentConfig::validate() const {
    if (sea_states.empty()) throw ConfigError("at least one sea state is required");
    std::set<std::string> labels;
    for (const auto& s : sea_states) {
        if (s.label.empty()) throw ConfigError("sea state label must not be empty");
        if (!labels.insert(s.label).second) throw ConfigError("duplicate sea state label '" + s.label + "'");
        try {
            s.sea.validate();
        } catch (const Error& e) {
            throw ConfigError("sea state " + s.label + ": " + e.what());
        }
    }
    const auto& ts = sea_state(training_sea_state);
    if (ts.splits.train == 0 || ts.splits.validation == 0)
        throw ConfigError("training sea state needs train and validation realizations");
    hull.validate();
    if (record.samples <= record.ramp_samples) throw ConfigError("record must be longer than the ramp");
    if (!(record.dt > 0.0)) throw ConfigError("record dt must be positive");
    if (record.components < 1) throw ConfigError("need at least one wave component");
    if (!(snippets.window_seconds > 0.0)) throw ConfigError("snippet window must be positive");
    if (snippets.k && *snippets.k < 1) throw ConfigError("k must be >= 1 or \"auto\"");
    if (!(snippets.coverage_threshold > 0.0 && snippets.coverage_threshold <= 1.0))
        throw ConfigError("coverage threshold must lie in (0, 1]");
    if (snippets.k_max < 1) throw ConfigError("k_max must be >= 1");
    if (network.input_channels != 3 || network.output_channels != 1)
        throw ConfigError("network must map 3 input channels to 1 output channel");
    network.validate();
}

ExperimentConfig desk_scale() {
    ExperimentConfig cfg;
    SeaStateEntry ss5{"SS5", {}, {300, 100, 600}};
    ss5.sea.significant_wave_height = 4.0;
    ss5.sea.modal_period = 15.0;
    ss5.sea.ship_speed = 10.0 * 1852.0 / 3600.0;
    SeaStateEntry ss6{"SS6", {}, {0, 0, 600}};
    ss6.sea.significant_wave_height = 6.0;
    ss6.sea.modal_period = 12.0;
    ss6.sea.ship_speed = ss5.sea.ship_speed;
    cfg.sea_states = {ss5, ss6};
    cfg.training_sea_state = "SS5";
    cfg.output_dir = "run";
    return cfg;
}

namespace {

void reject_unknown(const json& doc, std::initializer_list<const char*> known, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : doc.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
    if (auto it = doc.find(key); it != doc.end()) out = it->get<T>();
}

DofCoefficients dof_from_json(const json& doc, DofCoefficients d, const std::string& where) {
    reject_unknown(doc, {"natural_period", "linear_damping_ratio", "quadratic_damping_coeff",
                         "cubic_restoring_coeff", "forcing_gain"}, where);
    read(doc, "natural_period", d.natural_period);
    read(doc, "linear_damping_ratio", d.linear_damping_ratio);
    read(doc, "quadratic_damping_coeff", d.quadratic_damping_coeff);
    read(doc, "cubic_restoring_coeff", d.cubic_restoring_coeff);
    read(doc, "forcing_gain", d.forcing_gain);
    return d;
}

json dof_to_json(const DofCoefficients& d) {
    return {{"natural_period", d.natural_period},
            {"linear_damping_ratio", d.linear_damping_ratio},
            {"quadratic_damping_coeff", d.quadratic_damping_coeff},
            {"cubic_restoring_coeff", d.cubic_restoring_coeff},
            {"forcing_gain", d.forcing_gain}};
}

}  // namespace

hydro::HullConfig hull_from_json(const json& doc) {
    reject_unknown(doc, {"length", "beam", "draft", "displacement", "pitch", "heave", "roll", "stations",
                         "fk_saturation_coeff", "crest_quadratic_coeff", "flare_threshold", "flare_boost",
                         "flare_width", "slam_station", "slam_steepness", "slam_moment", "slam_width",
                         "low_fidelity_delay", "low_fidelity_quadratic_scale"},
                   "hull");
    hydro::HullConfig h;
    read(doc, "length", h.length);
    read(doc, "beam", h.beam);
    read(doc, "draft", h.draft);
    read(doc, "displacement", h.displacement);
    if (doc.contains("pitch")) h.pitch = dof_from_json(doc["pitch"], h.pitch, "hull.pitch");
    if (doc.contains("heave")) h.heave = dof_from_json(doc["heave"], h.heave, "hull.heave");
    if (doc.contains("roll")) h.roll = dof_from_json(doc["roll"], h.roll, "hull.roll");
    read(doc, "stations", h.stations);
    read(doc, "fk_saturation_coeff", h.fk_saturation_coeff);
    read(doc, "crest_quadratic_coeff", h.crest_quadratic_coeff);
    read(doc, "flare_threshold", h.flare_threshold);
    read(doc, "flare_boost", h.flare_boost);
    read(doc, "flare_width", h.flare_width);
    read(doc, "slam_station", h.slam_station);
    read(doc, "slam_steepness", h.slam_steepness);
    read(doc, "slam_moment", h.slam_moment);
    read(doc, "slam_width", h.slam_width);
    read(doc, "low_fidelity_delay", h.low_fidelity_delay);
    read(doc, "low_fidelity_quadratic_scale", h.low_fidelity_quadratic_scale);
    return h;
}

json to_json(const hydro::HullConfig& h) {
    return {{"length", h.length},
            {"beam", h.beam},
            {"draft", h.draft},
            {"displacement", h.displacement},
            {"pitch", dof_to_json(h.pitch)},
            {"heave", dof_to_json(h.heave)},
            {"roll", dof_to_json(h.roll)},
            {"stations", h.stations},
            {"fk_saturation_coeff", h.fk_saturation_coeff},
            {"crest_quadratic_coeff", h.crest_quadratic_coeff},
            {"flare_threshold", h.flare_threshold},
            {"flare_boost", h.flare_boost},
            {"flare_width", h.flare_width},
            {"slam_station", h.slam_station},
            {"slam_steepness", h.slam_steepness},
            {"slam_moment", h.slam_moment},
            {"slam_width", h.slam_width},
            {"low_fidelity_delay", h.low_fidelity_delay},
            {"low_fidelity_quadratic_scale", h.low_fidelity_quadratic_scale}};
}

ExperimentConfig from_json(const json& doc) {
    try {
        reject_unknown(doc, {"sea_states", "training_sea_state", "hull", "record", "snippets", "network",
                             "rng_seed", "output_dir"},
                       "config");
        ExperimentConfig cfg = desk_scale();
        if (doc.contains("sea_states")) {
            cfg.sea_states.clear();
            for (const auto& s : doc["sea_states"]) {
                reject_unknown(s, {"label", "significant_wave_height", "modal_period", "heading", "ship_speed",
                                   "splits"},
                               "sea_states[]");
                SeaStateEntry e;
                e.label = s.at("label").get<std::string>();
                e.sea.significant_wave_height = s.at("significant_wave_height").get<double>();
                e.sea.modal_period = s.at("modal_period").get<double>();
                read(s, "heading", e.sea.heading);
                read(s, "ship_speed", e.sea.ship_speed);
                if (s.contains("splits")) {
                    const auto& sp = s["splits"];
                    reject_unknown(sp, {"train", "validation", "test"}, "splits");
                    read(sp, "train", e.splits.train);
                    read(sp, "validation", e.splits.validation);
                    read(sp, "test", e.splits.test);
                }
                cfg.sea_states.push_back(std::move(e));
            }
        }
        read(doc, "training_sea_state", cfg.training_sea_state);
        if (doc.contains("hull")) cfg.hull = hull_from_json(doc["hull"]);
        if (doc.contains("record")) {
            const auto& r = doc["record"];
            reject_unknown(r, {"samples", "dt", "ramp_samples", "components", "low_fidelity_copies_high"}, "record");
            read(r, "samples", cfg.record.samples);
            read(r, "dt", cfg.record.dt);
            read(r, "ramp_samples", cfg.record.ramp_samples);
            read(r, "components", cfg.record.components);
            read(r, "low_fidelity_copies_high", cfg.record.low_fidelity_copies_high);
        }
        if (doc.contains("snippets")) {
            const auto& s = doc["snippets"];
            reject_unknown(s, {"window_seconds", "k", "coverage_threshold", "k_max"}, "snippets");
            read(s, "window_seconds", cfg.snippets.window_seconds);
            if (s.contains("k")) {
                if (s["k"].is_string()) {
                    if (s["k"].get<std::string>() != "auto") throw ConfigError("k must be an integer or \"auto\"");
                    cfg.snippets.k.reset();
                } else {
                    cfg.snippets.k = s["k"].get<std::size_t>();
                }
            }
            read(s, "coverage_threshold", cfg.snippets.coverage_threshold);
            read(s, "k_max", cfg.snippets.k_max);
        }
        if (doc.contains("network")) cfg.network = lstm::config_from_json(doc["network"]);
        read(doc, "rng_seed", cfg.rng_seed);
        read(doc, "output_dir", cfg.output_dir);
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

json to_json(const ExperimentConfig& cfg) {
    json states = json::array();
    for (const auto& s : cfg.sea_states)
        states.push_back({{"label", s.label},
                          {"significant_wave_height", s.sea.significant_wave_height},
                          {"modal_period", s.sea.modal_period},
                          {"heading", s.sea.heading},
                          {"ship_speed", s.sea.ship_speed},
                          {"splits", {{"train", s.splits.train},
                                      {"validation", s.splits.validation},
                                      {"test", s.splits.test}}}});
    json snip = {{"window_seconds", cfg.snippets.window_seconds},
                 {"coverage_threshold", cfg.snippets.coverage_threshold},
                 {"k_max", cfg.snippets.k_max}};
    if (cfg.snippets.k)
        snip["k"] = *cfg.snippets.k;
    else
        snip["k"] = "auto";
    return {{"sea_states", states},
            {"training_sea_state", cfg.training_sea_state},
            {"hull", to_json(cfg.hull)},
            {"record", {{"samples", cfg.record.samples},
                        {"dt", cfg.record.dt},
                        {"ramp_samples", cfg.record.ramp_samples},
                        {"components", cfg.record.components},
                        {"low_fidelity_copies_high", cfg.record.low_fidelity_copies_high}}},
            {"snippets", snip},
            {"network", lstm::to_json(cfg.network)},
            {"rng_seed", cfg.rng_seed},
            {"output_dir", cfg.output_dir}};
}

ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

}  // namespace snipcorr::config
