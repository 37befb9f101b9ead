#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snipcorr/hydro.hpp"
#include "snipcorr/lstm.hpp"
#include "snipcorr/seaway.hpp"

namespace snipcorr::config {

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;

    std::size_t total() const { return train + validation + test; }
};

enum class Split { train, validation, test };
const char* split_name(Split s);

struct SeaStateEntry {
    std::string label;
    seaway::SeaStateConfig sea;
    SplitSizes splits;

    // Realization indices: train [0, train), validation next, test last.
    std::size_t first_index(Split s) const;
    std::size_t count(Split s) const;
};

struct RecordConfig {
    std::size_t samples = 7000;       // including the ramp
    double dt = 0.1;                  // s
    std::size_t ramp_samples = 1000;  // excluded from statistics
    std::size_t components = seaway::kDefaultComponents;
    bool low_fidelity_copies_high = false;  // debug: LF motion files duplicate HF
};

struct SnippetConfig {
    double window_seconds = 50.0;
    std::optional<std::size_t> k;  // nullopt = "auto"
    double coverage_threshold = 0.95;
    std::size_t k_max = 30;
};

struct ExperimentConfig {
    std::vector<SeaStateEntry> sea_states;
    std::string training_sea_state = "SS5";
    hydro::HullConfig hull;
    RecordConfig record;
    SnippetConfig snippets;
    lstm::NetworkConfig network;
    std::uint64_t rng_seed = 20240601;
    std::string output_dir = "run";

    const SeaStateEntry& sea_state(const std::string& label) const;
    void validate() const;
};

// Desk-scale defaults: SS5 300/100/600 and SS6 test-only 600, 10-minute
// records after a 100 s ramp, tau 9 / h 30 / 2-layer network.
ExperimentConfig desk_scale();

ExperimentConfig from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load(const std::string& path);

hydro::HullConfig hull_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const hydro::HullConfig& hull);

}  // namespace snipcorr::config
