// snipcorr: command-line driver for the snippet-correction experiment.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snipcorr/config.hpp"
#include "snipcorr/error.hpp"
#include "snipcorr/pipeline.hpp"
#include "snipcorr/version.hpp"

namespace {

using nlohmann::json;
namespace pl = snipcorr::pipeline;

int fail(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return kind == "usage_error" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-fidelity pitch-extreme correction with LSTM snippets"};
    app.set_version_flag("--version", std::string(snipcorr::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    bool quiet = false;
    app.add_option("--config", config_path, "Experiment config (JSON); desk-scale defaults when omitted");
    app.add_option("--out", out_dir, "Run directory (overrides the config)");
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--jobs", jobs, "Worker threads for generate/analyze/evaluate")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    auto* generate = app.add_subcommand("generate", "Simulate wave, LF and HF records for every realization");
    auto* gap = app.add_subcommand("analyze-gap", "Fidelity gap, rank coverage and k selection");
    auto* build = app.add_subcommand("build-snippets", "Extract top-k LF snippets for each split");
    auto* train = app.add_subcommand("train", "Train the snippet or base LSTM");
    std::string mode = "snippet";
    train->add_option("--mode", mode, "snippet or base")->check(CLI::IsMember({"snippet", "base"}));
    auto* evaluate = app.add_subcommand("evaluate", "Score the test split of one sea state");
    std::string sea_state;
    evaluate->add_option("--sea-state", sea_state, "Sea-state label (default: the training sea state)");
    auto* report = app.add_subcommand("report", "Collect evaluation results into summary.json");
    auto* dump = app.add_subcommand("print-config", "Print the effective config as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage_error", e.what());
    }

    try {
        auto cfg = config_path.empty() ? snipcorr::config::desk_scale() : snipcorr::config::load(config_path);
        if (out_dir) cfg.output_dir = *out_dir;
        if (seed) cfg.rng_seed = *seed;
        cfg.validate();

        pl::RunOptions opts;
        opts.jobs = jobs;
        if (!quiet) opts.log = [](const std::string& line) { std::cout << line << std::endl; };

        if (*dump) {
            std::cout << snipcorr::config::to_json(cfg).dump(2) << '\n';
        } else if (*generate) {
            pl::cmd_generate(cfg, opts);
        } else if (*gap) {
            pl::cmd_analyze_gap(cfg, opts);
        } else if (*build) {
            pl::cmd_build_snippets(cfg, opts);
        } else if (*train) {
            pl::cmd_train(cfg, pl::parse_mode(mode), opts);
        } else if (*evaluate) {
            pl::cmd_evaluate(cfg, sea_state.empty() ? cfg.training_sea_state : sea_state, opts);
        } else if (*report) {
            const json summary = pl::cmd_report(cfg, opts);
            if (!quiet) std::cout << summary.dump(2) << '\n';
        }
    } catch (const snipcorr::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal_error", e.what());
    }
    return 0;
}
