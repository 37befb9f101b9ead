#include "snipcorr/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "snipcorr/csv.hpp"
#include "snipcorr/error.hpp"
#include "snipcorr/manifest.hpp"
#include "snipcorr/random.hpp"
#include "snipcorr/seaway.hpp"

namespace snipcorr::pipeline {

using config::ExperimentConfig;
using config::SeaStateEntry;
using config::Split;
using manifest::Manifest;
using nlohmann::json;

namespace {

constexpr const char* kStageGenerate = "generate";
constexpr const char* kStageGap = "analyze_gap";
constexpr const char* kStageSnippets = "build_snippets";
constexpr const char* kStageReport = "report";

std::string train_stage(TrainMode m) { return std::string("train_") + mode_name(m); }
std::string evaluate_stage(const std::string& label) { return "evaluate_" + label; }

void say(const RunOptions& opts, const std::string& msg) {
    if (opts.log) opts.log(msg);
}

std::string padded(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%05zu", i);
    return buf;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. When several calls
// fail, the lowest index wins so the reported error does not depend on timing.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string motion_csv(const hydro::MotionRecord& rec) {
    csv::Table t;
    t.header = {"t", "wave", "pitch", "heave", "roll"};
    std::vector<double> time(rec.size());
    for (std::size_t j = 0; j < rec.size(); ++j) time[j] = rec.pitch.time(j);
    t.columns = {std::move(time), rec.wave.values, rec.pitch.values, rec.heave.values, rec.roll.values};
    return csv::serialize(t);
}

std::string wave_csv(const TimeSeries& eta) {
    csv::Table t;
    t.header = {"t", "eta"};
    std::vector<double> time(eta.size());
    for (std::size_t j = 0; j < eta.size(); ++j) time[j] = eta.time(j);
    t.columns = {std::move(time), eta.values};
    return csv::serialize(t);
}

Manifest open_run(const ExperimentConfig& cfg, std::initializer_list<std::string> required) {
    cfg.validate();
    Manifest m = Manifest::open(cfg.output_dir, config_hash(cfg));
    for (const auto& stage : required)
        if (!m.has_stage(stage)) throw IoError("stage '" + stage + "' has not completed in " + cfg.output_dir);
    return m;
}

hydro::MotionRecord load_motion(const Manifest& m, const ExperimentConfig& cfg, hydro::Fidelity f,
                                const std::string& label, std::size_t index) {
    const std::string rel = motion_path(f, label, index);
    const csv::Table t = csv::parse(m.read_verified(rel), rel);
    if (t.rows() != cfg.record.samples) throw IntegrityError(rel + " has an unexpected number of samples");
    const double dt = cfg.record.dt;
    hydro::MotionRecord rec;
    rec.pitch = TimeSeries(t.column("pitch"), dt);
    rec.heave = TimeSeries(t.column("heave"), dt);
    rec.roll = TimeSeries(t.column("roll"), dt);
    rec.wave = TimeSeries(t.column("wave"), dt);
    rec.fidelity = f;
    return rec;
}

struct PairedRecord {
    hydro::MotionRecord low;
    hydro::MotionRecord high;
};

PairedRecord load_pair(const Manifest& m, const ExperimentConfig& cfg, const std::string& label, std::size_t index) {
    return {load_motion(m, cfg, hydro::Fidelity::low, label, index),
            load_motion(m, cfg, hydro::Fidelity::high, label, index)};
}

std::size_t argmax_from(const std::vector<double>& v, std::size_t skip) {
    return static_cast<std::size_t>(std::max_element(v.begin() + static_cast<std::ptrdiff_t>(skip), v.end()) - v.begin());
}

snippets::PeakOptions peak_options(const ExperimentConfig& cfg, const SeaStateEntry& ss) {
    return {snippets::default_separation(ss.sea, cfg.record.dt), cfg.record.ramp_samples};
}

std::size_t resolve_k(const ExperimentConfig& cfg, const Manifest& m) {
    if (cfg.snippets.k) return *cfg.snippets.k;
    const auto v = m.value(kStageGap, "chosen_k");
    if (!v || !m.has_stage(kStageGap)) throw IoError("k is \"auto\" but no gap analysis has been recorded");
    return v->get<std::size_t>();
}

void check_split_hygiene(const SeaStateEntry& ss) {
    std::set<std::size_t> seen;
    for (Split s : {Split::train, Split::validation, Split::test}) {
        for (std::size_t i = 0; i < ss.count(s); ++i)
            if (!seen.insert(ss.first_index(s) + i).second)
                throw ConfigError(ss.label + ": realization " + std::to_string(ss.first_index(s) + i) +
                                  " appears in more than one split");
    }
}

std::vector<lstm::Sample> training_samples(const std::vector<snippets::Snippet>& snips) {
    std::vector<lstm::Sample> out;
    out.reserve(snips.size());
    for (const auto& s : snips) {
        if (!s.target) throw IntegrityError("training snippet without target");
        out.push_back({s.channels, {*s.target}});
    }
    return out;
}

std::vector<std::vector<double>> post_ramp_inputs(const hydro::MotionRecord& lf, std::size_t skip) {
    auto tail = [skip](const TimeSeries& ts) {
        return std::vector<double>(ts.values.begin() + static_cast<std::ptrdiff_t>(skip), ts.values.end());
    };
    return {tail(lf.pitch), tail(lf.heave), tail(lf.wave)};
}

lstm::Sample base_sample(const PairedRecord& p, std::size_t skip) {
    lstm::Sample s;
    s.inputs = post_ramp_inputs(p.low, skip);
    s.targets = {std::vector<double>(p.high.pitch.values.begin() + static_cast<std::ptrdiff_t>(skip),
                                     p.high.pitch.values.end())};
    return s;
}

std::string history_csv(const lstm::TrainingHistory& h) {
    csv::Table t;
    t.header = {"epoch", "train_mse", "validation_mse"};
    t.columns.resize(3);
    for (std::size_t e = 0; e < h.train_mse.size(); ++e) {
        t.columns[0].push_back(static_cast<double>(e + 1));
        t.columns[1].push_back(h.train_mse[e]);
        t.columns[2].push_back(h.validation_mse[e]);
    }
    return csv::serialize(t);
}

std::string pdf_csv(const evalstats::PdfCurve& pdf) {
    csv::Table t;
    t.header = {"support", "density"};
    t.columns = {pdf.support, pdf.density};
    return csv::serialize(t);
}

// Per-realization outcome of one evaluation.
struct Scored {
    std::size_t rid = 0;
    double hf_max = 0.0;
    std::size_t hf_index = 0;
    double lf_max = 0.0;
    double base_max = std::numeric_limits<double>::quiet_NaN();
    double snippet_max = std::numeric_limits<double>::quiet_NaN();
    std::size_t snippet_index = 0;
};

struct SnippetCorrection {
    snippets::Snippet snippet;
    std::vector<double> values;
};

// Top-k snippets of the LF record, corrected; returns the selected one.
std::optional<SnippetCorrection> correct_snippets(const lstm::LstmNetwork& net, const hydro::MotionRecord& lf,
                                                  const snippets::PeakOptions& po, std::size_t k, double window,
                                                  std::size_t rid) {
    const auto top = snippets::top_k(snippets::detect_peaks(lf.pitch, po), k);
    if (top.empty()) return std::nullopt;
    std::vector<snippets::Snippet> snips;
    std::vector<std::vector<std::vector<double>>> inputs;
    for (std::size_t c : top.indices) {
        snips.push_back(snippets::extract_snippet(lf, c, window, nullptr, rid));
        inputs.push_back(snips.back().channels);
    }
    const auto outputs = net.forward_batch(inputs);
    std::vector<snippets::CorrectedWindow> windows;
    for (std::size_t i = 0; i < snips.size(); ++i) windows.push_back({snips[i].center_index, outputs[i][0]});
    const std::size_t best = snippets::select_best_output(windows);
    return SnippetCorrection{snips[best], windows[best].values};
}

}  // namespace

const char* mode_name(TrainMode m) {
    return m == TrainMode::snippet ? "snippet" : "base";
}

TrainMode parse_mode(const std::string& name) {
    if (name == "snippet") return TrainMode::snippet;
    if (name == "base") return TrainMode::base;
    throw ConfigError("unknown training mode '" + name + "' (expected snippet or base)");
}

std::string config_hash(const ExperimentConfig& cfg) {
    json doc = config::to_json(cfg);
    doc.erase("output_dir");
    return manifest::sha256_hex(doc.dump());
}

std::string wave_path(const std::string& label, std::size_t index) {
    return "data/" + label + "/wave_" + label + "_" + padded(index) + ".csv";
}

std::string motion_path(hydro::Fidelity f, const std::string& label, std::size_t index) {
    return "data/" + label + "/motion_" + hydro::fidelity_name(f) + "_" + label + "_" + padded(index) + ".csv";
}

std::string model_path(const std::string& mode) {
    return "models/" + mode + "_lstm.json";
}

void cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    Manifest m = Manifest::create(cfg.output_dir, config_hash(cfg));
    m.begin_stage(kStageGenerate);
    const hydro::SimulationSettings settings{cfg.record.ramp_samples, cfg.record.dt};

    for (const auto& ss : cfg.sea_states) {
        check_split_hygiene(ss);
        const std::size_t n = ss.splits.total();
        say(opts, "generate " + ss.label + ": " + std::to_string(n) + " realizations");
        std::filesystem::create_directories(m.path_of("data/" + ss.label));
        std::vector<std::array<std::string, 3>> hashes(n);
        parallel_for(n, opts.jobs, [&](std::size_t i) {
            const auto seed = derive_seed(cfg.rng_seed, "wave/" + ss.label, i);
            const auto disc = seaway::discretize(ss.sea, cfg.record.components, seaway::default_range(ss.sea), seed);
            const TimeSeries eta =
                seaway::realize_elevation(seaway::to_encounter_frame(disc, ss.sea), cfg.record.samples, cfg.record.dt);
            hydro::MotionRecord hf, lf;
            try {
                hf = hydro::simulate_high_fidelity(eta, cfg.hull, ss.sea, settings);
                if (cfg.record.low_fidelity_copies_high) {
                    lf = hf;
                    lf.fidelity = hydro::Fidelity::low;
                } else {
                    lf = hydro::simulate_low_fidelity(eta, cfg.hull, ss.sea, settings);
                }
            } catch (const SimulationError& e) {
                throw SimulationError(ss.label + " realization " + std::to_string(i) + ": " + e.what(), e.index());
            }
            const std::array<std::pair<std::string, std::string>, 3> files{
                std::pair{wave_path(ss.label, i), wave_csv(eta)},
                std::pair{motion_path(hydro::Fidelity::low, ss.label, i), motion_csv(lf)},
                std::pair{motion_path(hydro::Fidelity::high, ss.label, i), motion_csv(hf)}};
            for (std::size_t f = 0; f < files.size(); ++f) {
                csv::write_atomic(m.path_of(files[f].first), files[f].second);
                hashes[i][f] = manifest::sha256_hex(files[f].second);
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            m.record(kStageGenerate, wave_path(ss.label, i), hashes[i][0]);
            m.record(kStageGenerate, motion_path(hydro::Fidelity::low, ss.label, i), hashes[i][1]);
            m.record(kStageGenerate, motion_path(hydro::Fidelity::high, ss.label, i), hashes[i][2]);
        }
        m.set_value(kStageGenerate, "realizations_" + ss.label, n);
    }
    m.finish_stage(kStageGenerate);
}

std::vector<GapAnalysis> cmd_analyze_gap(const ExperimentConfig& cfg, const RunOptions& opts) {
    Manifest m = open_run(cfg, {kStageGenerate});
    m.begin_stage(kStageGap);
    std::vector<GapAnalysis> out;

    for (const auto& ss : cfg.sea_states) {
        const std::size_t n = ss.splits.total();
        say(opts, "analyze-gap " + ss.label);
        const auto po = peak_options(cfg, ss);
        std::vector<double> lmax(n), hmax(n), offset(n);
        std::vector<std::optional<std::size_t>> rank(n);
        parallel_for(n, opts.jobs, [&](std::size_t i) {
            const PairedRecord p = load_pair(m, cfg, ss.label, i);
            const std::size_t li = argmax_from(p.low.pitch.values, po.skip_samples);
            const std::size_t hi = argmax_from(p.high.pitch.values, po.skip_samples);
            lmax[i] = p.low.pitch[li];
            hmax[i] = p.high.pitch[hi];
            offset[i] = p.low.pitch.time(li) - p.high.pitch.time(hi);
            rank[i] = snippets::relative_rank(snippets::detect_peaks(p.low.pitch, po), p.high.pitch,
                                              po.min_separation, po.skip_samples);
        });

        GapAnalysis ga;
        ga.label = ss.label;
        ga.gap = hydro::summarize_gap(lmax, hmax, offset);
        const std::size_t fit_n = ss.count(Split::train) + ss.count(Split::validation);
        ga.ranks.assign(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(fit_n));
        if (fit_n > 0) {
            ga.coverage = snippets::coverage_curve(ga.ranks, cfg.snippets.k_max);
            ga.rank1_fraction = ga.coverage.coverage.front();
        }
        if (ss.label == cfg.training_sea_state) {
            if (fit_n == 0) throw ConfigError("training sea state has no train/validation realizations");
            if (cfg.snippets.k) {
                const std::size_t k = *cfg.snippets.k;
                const double cov = k <= ga.coverage.coverage.size() ? ga.coverage.coverage[k - 1] : ga.coverage.coverage.back();
                ga.chosen_k = snippets::KChoice{k, cov >= cfg.snippets.coverage_threshold};
            } else {
                ga.chosen_k = snippets::choose_k(ga.coverage, cfg.snippets.coverage_threshold);
            }
            m.set_value(kStageGap, "chosen_k", ga.chosen_k->k);
            m.set_value(kStageGap, "k_threshold_reached", ga.chosen_k->reached);
            if (!ga.chosen_k->reached) say(opts, "warning: coverage threshold not reached; using k_max");
        }

        const std::string dir = "gap/" + ss.label + "/";
        csv::Table scatter;
        scatter.header = {"realization_id", "lf_max", "hf_max", "time_offset"};
        std::vector<double> ids(n);
        std::iota(ids.begin(), ids.end(), 0.0);
        scatter.columns = {ids, lmax, hmax, offset};
        m.write_artifact(kStageGap, dir + "maxima_scatter.csv", csv::serialize(scatter));

        std::size_t max_rank = 0, unmatched = 0;
        for (const auto& r : ga.ranks) {
            if (r) max_rank = std::max(max_rank, *r);
            else ++unmatched;
        }
        csv::Table hist;
        hist.header = {"rank", "count"};
        hist.columns.resize(2);
        for (std::size_t r = 1; r <= max_rank; ++r) {
            hist.columns[0].push_back(static_cast<double>(r));
            hist.columns[1].push_back(static_cast<double>(std::count(ga.ranks.begin(), ga.ranks.end(), std::optional(r))));
        }
        m.write_artifact(kStageGap, dir + "rank_histogram.csv", csv::serialize(hist));

        if (!ga.ranks.empty()) {
            csv::Table cov;
            cov.header = {"k", "coverage"};
            cov.columns.resize(2);
            for (std::size_t i = 0; i < ga.coverage.k_values.size(); ++i) {
                cov.columns[0].push_back(static_cast<double>(ga.coverage.k_values[i]));
                cov.columns[1].push_back(ga.coverage.coverage[i]);
            }
            m.write_artifact(kStageGap, dir + "coverage_curve.csv", csv::serialize(cov));
        }

        json report{{"label", ss.label},
                    {"realizations", n},
                    {"maxima_correlation", ga.gap.maxima_correlation},
                    {"mean_peak_ratio", ga.gap.mean_peak_ratio},
                    {"mean_time_offset", ga.gap.mean_time_offset},
                    {"rank_realizations", ga.ranks.size()},
                    {"rank1_fraction", ga.rank1_fraction ? json(*ga.rank1_fraction) : json(nullptr)},
                    {"unmatched", unmatched}};
        if (ga.chosen_k) {
            report["chosen_k"] = ga.chosen_k->k;
            report["k_threshold_reached"] = ga.chosen_k->reached;
        }
        m.write_artifact(kStageGap, dir + "gap_report.json", report.dump(2) + "\n");
        say(opts, "  correlation " + std::to_string(ga.gap.maxima_correlation) +
                      (ga.rank1_fraction ? ", rank-1 " + std::to_string(*ga.rank1_fraction) : std::string()) +
                      (ga.chosen_k ? ", k " + std::to_string(ga.chosen_k->k) : std::string()));
        out.push_back(std::move(ga));
    }
    m.finish_stage(kStageGap);
    return out;
}

SnippetCounts cmd_build_snippets(const ExperimentConfig& cfg, const RunOptions& opts) {
    Manifest m = open_run(cfg, {kStageGenerate});
    const std::size_t k = resolve_k(cfg, m);
    const auto& ss = cfg.sea_state(cfg.training_sea_state);
    check_split_hygiene(ss);
    const auto po = peak_options(cfg, ss);
    m.begin_stage(kStageSnippets);

    SnippetCounts counts;
    counts.k = k;
    for (Split split : {Split::train, Split::validation, Split::test}) {
        const std::size_t first = ss.first_index(split), n = ss.count(split);
        std::vector<std::vector<snippets::Snippet>> per(n);
        parallel_for(n, opts.jobs, [&](std::size_t i) {
            const std::size_t rid = first + i;
            const PairedRecord p = load_pair(m, cfg, ss.label, rid);
            const auto top = snippets::top_k(snippets::detect_peaks(p.low.pitch, po), k);
            for (std::size_t c : top.indices)
                per[i].push_back(snippets::extract_snippet(p.low, c, cfg.snippets.window_seconds, &p.high, rid));
        });
        std::vector<snippets::Snippet> all;
        for (auto& v : per)
            for (auto& s : v) all.push_back(std::move(s));
        const std::string name = config::split_name(split);
        if (split == Split::test) {
            m.write_artifact(kStageSnippets, "snippets/snippets_test.csv",
                             snippets::serialize_snippets(all, snippets::SnippetColumns::inputs));
            m.write_artifact(kStageSnippets, "snippets/snippets_test_targets.csv",
                             snippets::serialize_snippets(all, snippets::SnippetColumns::target));
            counts.test = all.size();
        } else {
            m.write_artifact(kStageSnippets, "snippets/snippets_" + name + ".csv",
                             snippets::serialize_snippets(all, snippets::SnippetColumns::inputs_and_target));
            (split == Split::train ? counts.train : counts.validation) = all.size();
        }
        say(opts, "build-snippets " + name + ": " + std::to_string(all.size()) + " snippets");
    }

    const json index{{"sea_state", ss.label},
                     {"k", k},
                     {"window_seconds", cfg.snippets.window_seconds},
                     {"window_samples", snippets::window_samples(cfg.snippets.window_seconds, cfg.record.dt)},
                     {"dt", cfg.record.dt},
                     {"columns", {"realization_id", "center_index", "channel", "sample_index", "value"}},
                     {"inputs", snippets::input_channel_names()},
                     {"target", snippets::kTargetChannel},
                     {"counts", {{"train", counts.train}, {"validation", counts.validation}, {"test", counts.test}}}};
    m.write_artifact(kStageSnippets, "snippets/index.json", index.dump(2) + "\n");
    m.finish_stage(kStageSnippets);
    return counts;
}

lstm::TrainingHistory cmd_train(const ExperimentConfig& cfg, TrainMode mode, const RunOptions& opts) {
    Manifest m = open_run(cfg, {kStageGenerate});
    std::vector<lstm::Sample> train_set, val_set;
    if (mode == TrainMode::snippet) {
        if (!m.has_stage(kStageSnippets)) throw IoError("snippet training needs `build-snippets` first");
        train_set = training_samples(snippets::parse_snippets(m.read_verified("snippets/snippets_train.csv")));
        val_set = training_samples(snippets::parse_snippets(m.read_verified("snippets/snippets_validation.csv")));
    } else {
        const auto& ss = cfg.sea_state(cfg.training_sea_state);
        for (Split split : {Split::train, Split::validation}) {
            auto& dst = split == Split::train ? train_set : val_set;
            dst.resize(ss.count(split));
            parallel_for(dst.size(), opts.jobs, [&](std::size_t i) {
                dst[i] = base_sample(load_pair(m, cfg, ss.label, ss.first_index(split) + i), cfg.record.ramp_samples);
            });
        }
    }
    if (train_set.empty()) throw IoError("no training samples");
    if (val_set.empty()) throw IoError("no validation samples");

    const std::string stage = train_stage(mode);
    m.begin_stage(stage);
    say(opts, std::string("train ") + mode_name(mode) + ": " + std::to_string(train_set.size()) + " train / " +
                  std::to_string(val_set.size()) + " validation sequences");
    lstm::TrainOptions to;
    to.on_epoch = [&](int epoch, double tr, double va) {
        if (epoch % 10 == 0 || epoch == 1)
            say(opts, "  epoch " + std::to_string(epoch) + " train " + std::to_string(tr) + " validation " + std::to_string(va));
    };
    // Both modes share one derived seed so they start from the same weights.
    lstm::NetworkConfig net_cfg = cfg.network;
    net_cfg.rng_seed = derive_seed(cfg.rng_seed, "lstm", cfg.network.rng_seed);
    auto result = lstm::train(train_set, val_set, net_cfg, to);

    m.write_artifact(stage, model_path(mode_name(mode)), lstm::to_json(result.network).dump() + "\n");
    m.write_artifact(stage, std::string("models/") + mode_name(mode) + "_history.csv", history_csv(result.history));
    m.set_value(stage, "epochs", result.history.train_mse.size());
    m.set_value(stage, "best_epoch", result.history.best_epoch);
    m.set_value(stage, "best_validation_mse", result.history.best_validation_mse);
    m.set_value(stage, "stop_reason", result.history.stop_reason);
    m.finish_stage(stage);
    say(opts, "  stopped: " + result.history.stop_reason);
    return result.history;
}

Evaluation cmd_evaluate(const ExperimentConfig& cfg, const std::string& label, const RunOptions& opts) {
    Manifest m = open_run(cfg, {kStageGenerate});
    const auto& ss = cfg.sea_state(label);
    if (ss.count(Split::test) < 10) throw ConfigError(label + " needs at least 10 test realizations to evaluate");
    const auto po = peak_options(cfg, ss);
    const std::size_t skip = cfg.record.ramp_samples;

    std::optional<lstm::LstmNetwork> snippet_net, base_net;
    if (m.has_stage(train_stage(TrainMode::snippet)))
        snippet_net = lstm::from_json(json::parse(m.read_verified(model_path("snippet"))));
    if (m.has_stage(train_stage(TrainMode::base)))
        base_net = lstm::from_json(json::parse(m.read_verified(model_path("base"))));
    const std::size_t k = snippet_net ? resolve_k(cfg, m) : 0;

    const std::string stage = evaluate_stage(label);
    m.begin_stage(stage);
    const std::size_t first = ss.first_index(Split::test), n = ss.count(Split::test);
    say(opts, "evaluate " + label + ": " + std::to_string(n) + " test realizations");
    std::vector<Scored> scored(n);
    parallel_for(n, opts.jobs, [&](std::size_t i) {
        Scored& s = scored[i];
        s.rid = first + i;
        const PairedRecord p = load_pair(m, cfg, label, s.rid);
        s.hf_index = argmax_from(p.high.pitch.values, skip);
        s.hf_max = p.high.pitch[s.hf_index];
        s.lf_max = p.low.pitch[argmax_from(p.low.pitch.values, skip)];
        if (base_net) {
            const auto out = base_net->forward(post_ramp_inputs(p.low, skip))[0];
            s.base_max = *std::max_element(out.begin(), out.end());
        }
        if (snippet_net) {
            const auto best = correct_snippets(*snippet_net, p.low, po, k, cfg.snippets.window_seconds, s.rid);
            if (!best) throw IoError(label + " realization " + std::to_string(s.rid) + " has no LF peaks");
            const std::size_t j = argmax_from(best->values, 0);
            s.snippet_max = best->values[j];
            s.snippet_index = best->snippet.start_index + j;
        }
    });

    Evaluation ev;
    ev.label = label;
    const std::string dir = "eval/" + label + "/";
    auto add_report = [&](const std::string& method, auto pick) {
        evalstats::MaximaSample pairs;
        for (const auto& s : scored) pairs.push_back({pick(s), s.hf_max, s.rid});
        auto rep = evalstats::build_report(pairs, method);
        m.write_artifact(stage, dir + "report_" + method + ".json", evalstats::to_json(rep).dump(2) + "\n");
        m.write_artifact(stage, dir + "pdf_" + method + ".csv", pdf_csv(rep.pdf_method));
        ev.reports.emplace(method, std::move(rep));
    };
    add_report("low_fidelity", [](const Scored& s) { return s.lf_max; });
    if (base_net) add_report("base_lstm", [](const Scored& s) { return s.base_max; });
    if (snippet_net) add_report("snippet_lstm", [](const Scored& s) { return s.snippet_max; });
    m.write_artifact(stage, dir + "pdf_truth.csv", pdf_csv(ev.reports.at("low_fidelity").pdf_truth));

    csv::Table scatter;
    scatter.header = {"realization_id", "hf_max", "low_fidelity"};
    scatter.columns.resize(3);
    if (base_net) scatter.header.push_back("base_lstm");
    if (snippet_net) scatter.header.push_back("snippet_lstm");
    scatter.columns.resize(scatter.header.size());
    for (const auto& s : scored) {
        std::size_t c = 0;
        scatter.columns[c++].push_back(static_cast<double>(s.rid));
        scatter.columns[c++].push_back(s.hf_max);
        scatter.columns[c++].push_back(s.lf_max);
        if (base_net) scatter.columns[c++].push_back(s.base_max);
        if (snippet_net) scatter.columns[c++].push_back(s.snippet_max);
    }
    m.write_artifact(stage, dir + "maxima_scatter.csv", csv::serialize(scatter));

    // Overlay for the realization holding the ensemble-largest HF event.
    const auto top = std::max_element(scored.begin(), scored.end(),
                                       [](const Scored& a, const Scored& b) { return a.hf_max < b.hf_max; });
    {
        const PairedRecord p = load_pair(m, cfg, label, top->rid);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const std::size_t N = p.high.size();
        csv::Table ov;
        ov.header = {"t", "hf_pitch", "lf_pitch"};
        std::vector<double> t(N);
        for (std::size_t j = 0; j < N; ++j) t[j] = p.high.pitch.time(j);
        ov.columns = {t, p.high.pitch.values, p.low.pitch.values};
        if (base_net) {
            std::vector<double> col(N, nan);
            const auto out = base_net->forward(post_ramp_inputs(p.low, skip))[0];
            std::copy(out.begin(), out.end(), col.begin() + static_cast<std::ptrdiff_t>(skip));
            ov.header.push_back("base_lstm");
            ov.columns.push_back(std::move(col));
        }
        if (snippet_net) {
            std::vector<double> col(N, nan);
            const auto best = correct_snippets(*snippet_net, p.low, po, k, cfg.snippets.window_seconds, top->rid);
            std::copy(best->values.begin(), best->values.end(),
                      col.begin() + static_cast<std::ptrdiff_t>(best->snippet.start_index));
            ov.header.push_back("snippet_lstm");
            ov.columns.push_back(std::move(col));

            PeakEvent pe;
            pe.realization_id = top->rid;
            pe.hf_peak = top->hf_max;
            pe.hf_peak_time = p.high.pitch.time(top->hf_index);
            pe.snippet_peak = top->snippet_max;
            pe.snippet_peak_time = p.high.pitch.time(top->snippet_index);
            pe.relative_error = std::abs(pe.snippet_peak - pe.hf_peak) / std::abs(pe.hf_peak);
            pe.time_offset = pe.snippet_peak_time - pe.hf_peak_time;
            pe.half_encounter_period = seaway::modal_encounter_period(ss.sea) / 2.0;
            ev.peak_event = pe;
        }
        m.write_artifact(stage, dir + "overlay.csv", csv::serialize(ov));
    }

    json metrics{{"label", label}, {"test_realizations", n}, {"reports", json::object()}};
    for (const auto& [method, rep] : ev.reports) {
        json r = evalstats::to_json(rep);
        r.erase("pdf_method");
        r.erase("pdf_truth");
        metrics["reports"][method] = std::move(r);
    }
    if (ev.peak_event) {
        const auto& pe = *ev.peak_event;
        metrics["peak_event"] = {{"realization_id", pe.realization_id},
                                 {"hf_peak", pe.hf_peak},
                                 {"hf_peak_time", pe.hf_peak_time},
                                 {"snippet_peak", pe.snippet_peak},
                                 {"snippet_peak_time", pe.snippet_peak_time},
                                 {"relative_error", pe.relative_error},
                                 {"time_offset", pe.time_offset},
                                 {"half_encounter_period", pe.half_encounter_period}};
    }
    m.write_artifact(stage, dir + "metrics.json", metrics.dump(2) + "\n");
    m.finish_stage(stage);
    for (const auto& [method, rep] : ev.reports)
        say(opts, "  " + method + ": R2 " + std::to_string(rep.r_squared) + ", MPM error " +
                      std::to_string(rep.mpm_signed_error) + ", p95 error " + std::to_string(rep.p95_relative_error));
    return ev;
}

json cmd_report(const ExperimentConfig& cfg, const RunOptions& opts) {
    Manifest m = open_run(cfg, {kStageGenerate});
    json summary{{"config_hash", config_hash(cfg)}, {"sea_states", json::object()}};
    if (auto k = m.value(kStageGap, "chosen_k")) summary["chosen_k"] = *k;
    for (const auto& ss : cfg.sea_states) {
        json entry = json::object();
        const std::string gap = "gap/" + ss.label + "/gap_report.json";
        if (m.has_stage(kStageGap) && m.hash_of(gap)) entry["gap"] = json::parse(m.read_verified(gap));
        if (m.has_stage(evaluate_stage(ss.label)))
            entry["evaluation"] = json::parse(m.read_verified("eval/" + ss.label + "/metrics.json"));
        if (!entry.empty()) summary["sea_states"][ss.label] = std::move(entry);
    }
    for (TrainMode mode : {TrainMode::snippet, TrainMode::base}) {
        const std::string stage = train_stage(mode);
        if (!m.has_stage(stage)) continue;
        summary["training"][mode_name(mode)] = {{"epochs", *m.value(stage, "epochs")},
                                                {"best_epoch", *m.value(stage, "best_epoch")},
                                                {"best_validation_mse", *m.value(stage, "best_validation_mse")},
                                                {"stop_reason", *m.value(stage, "stop_reason")}};
    }
    m.begin_stage(kStageReport);
    m.write_artifact(kStageReport, "summary.json", summary.dump(2) + "\n");
    m.finish_stage(kStageReport);
    say(opts, "report written to " + m.path_of("summary.json"));
    return summary;
}

}  // namespace snipcorr::pipeline
