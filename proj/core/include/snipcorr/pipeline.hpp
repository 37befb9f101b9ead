#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snipcorr/config.hpp"
#include "snipcorr/evalstats.hpp"
#include "snipcorr/hydro.hpp"
#include "snipcorr/lstm.hpp"
#include "snipcorr/snippets.hpp"

namespace snipcorr::pipeline {

struct RunOptions {
    unsigned jobs = 1;
    std::function<void(const std::string&)> log;  // progress lines; may be empty
};

// SHA-256 of the canonical config JSON. The output directory is left out so
// the same experiment can be replayed into another directory.
std::string config_hash(const config::ExperimentConfig& cfg);

// Run-relative artifact paths.
std::string wave_path(const std::string& label, std::size_t index);
std::string motion_path(hydro::Fidelity f, const std::string& label, std::size_t index);
std::string model_path(const std::string& mode);

// Waves plus paired LF/HF motions for every realization of every sea state.
void cmd_generate(const config::ExperimentConfig& cfg, const RunOptions& opts = {});

struct GapAnalysis {
    std::string label;
    hydro::GapSummary gap;
    std::vector<std::optional<std::size_t>> ranks;  // per realization, k-selection splits
    snippets::CoverageCurve coverage;
    std::optional<double> rank1_fraction;  // absent without train/validation realizations
    std::optional<snippets::KChoice> chosen_k;  // training sea state only
};

// Gap statistics for every sea state. Ranks, coverage and k come from the
// train and validation realizations only.
std::vector<GapAnalysis> cmd_analyze_gap(const config::ExperimentConfig& cfg, const RunOptions& opts = {});

struct SnippetCounts {
    std::size_t k = 0;
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

SnippetCounts cmd_build_snippets(const config::ExperimentConfig& cfg, const RunOptions& opts = {});

enum class TrainMode { snippet, base };
const char* mode_name(TrainMode m);
TrainMode parse_mode(const std::string& name);

lstm::TrainingHistory cmd_train(const config::ExperimentConfig& cfg, TrainMode mode, const RunOptions& opts = {});

struct PeakEvent {
    std::size_t realization_id = 0;
    double hf_peak = 0.0;
    double hf_peak_time = 0.0;
    double snippet_peak = 0.0;
    double snippet_peak_time = 0.0;
    double relative_error = 0.0;
    double time_offset = 0.0;  // snippet - hf, s
    double half_encounter_period = 0.0;
};

struct Evaluation {
    std::string label;
    std::map<std::string, evalstats::MetricsReport> reports;  // keyed by method
    std::optional<PeakEvent> peak_event;
};

// Scores the test split of `label` for the LF surrogate and every trained model.
Evaluation cmd_evaluate(const config::ExperimentConfig& cfg, const std::string& label, const RunOptions& opts = {});

// Collects the evaluation reports of every sea state into summary.json.
nlohmann::json cmd_report(const config::ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace snipcorr::pipeline
