#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "snipcorr/config.hpp"
#include "snipcorr/error.hpp"

using namespace snipcorr;
using namespace snipcorr::config;
using nlohmann::json;

TEST_CASE("desk-scale defaults") {
    const auto cfg = desk_scale();
    CHECK_NOTHROW(cfg.validate());
    const auto& ss5 = cfg.sea_state("SS5");
    CHECK(ss5.sea.significant_wave_height == 4.0);
    CHECK(ss5.sea.modal_period == 15.0);
    CHECK(ss5.splits.train == 300);
    CHECK(ss5.splits.validation == 100);
    CHECK(ss5.splits.test == 600);
    const auto& ss6 = cfg.sea_state("SS6");
    CHECK(ss6.sea.significant_wave_height == 6.0);
    CHECK(ss6.sea.modal_period == 12.0);
    CHECK(ss6.splits.test == 600);
    CHECK(cfg.record.samples - cfg.record.ramp_samples == 6000);
    CHECK(cfg.snippets.window_seconds == 50.0);
    CHECK_FALSE(cfg.snippets.k.has_value());
    CHECK(cfg.network.tau == 9);
    CHECK(cfg.network.hidden_size == 30);
    CHECK_THROWS_AS(cfg.sea_state("SS7"), ConfigError);
}

TEST_CASE("split index ranges are disjoint and ordered") {
    const auto& s = desk_scale().sea_state("SS5");
    CHECK(s.first_index(Split::train) == 0);
    CHECK(s.first_index(Split::validation) == 300);
    CHECK(s.first_index(Split::test) == 400);
    CHECK(s.count(Split::test) == 600);
}

TEST_CASE("JSON round trip preserves every field") {
    auto cfg = desk_scale();
    cfg.snippets.k = 7;
    cfg.hull.flare_boost = 1.25;
    cfg.network.hidden_size = 12;
    cfg.rng_seed = 99;
    const auto doc = to_json(cfg);
    const auto back = from_json(json::parse(doc.dump()));
    CHECK(to_json(back) == doc);
    CHECK(back.snippets.k == std::optional<std::size_t>(7));
    CHECK(back.hull.flare_boost == 1.25);
    CHECK(back.rng_seed == 99);

    cfg.snippets.k.reset();
    CHECK(to_json(cfg)["snippets"]["k"] == "auto");
    CHECK_FALSE(from_json(to_json(cfg)).snippets.k.has_value());
}

TEST_CASE("partial documents fall back to defaults") {
    const auto cfg = from_json(json{{"rng_seed", 5}});
    CHECK(cfg.rng_seed == 5);
    CHECK(cfg.sea_states.size() == 2);
}

TEST_CASE("unknown keys and bad values are rejected") {
    auto doc = to_json(desk_scale());
    doc["snippets"]["windw_seconds"] = 50.0;
    CHECK_THROWS_AS(from_json(doc), ConfigError);

    doc = to_json(desk_scale());
    doc["hull"]["pitch"]["gain"] = 1.0;
    CHECK_THROWS_AS(from_json(doc), ConfigError);

    doc = to_json(desk_scale());
    doc["snippets"]["k"] = "many";
    CHECK_THROWS_AS(from_json(doc), ConfigError);

    doc = to_json(desk_scale());
    doc["sea_states"][1]["label"] = "SS5";
    CHECK_THROWS_AS(from_json(doc), ConfigError);

    doc = to_json(desk_scale());
    doc["record"]["samples"] = 500;
    CHECK_THROWS_AS(from_json(doc), ConfigError);

    doc = to_json(desk_scale());
    doc["network"]["tau"] = "nine";
    CHECK_THROWS_AS(from_json(doc), ConfigError);
}

TEST_CASE("load reads files and reports parse errors") {
    const std::string path = "config_test_tmp.json";
    {
        std::ofstream(path) << to_json(desk_scale()).dump(2);
    }
    CHECK(to_json(load(path)) == to_json(desk_scale()));
    {
        std::ofstream(path) << "{ not json";
    }
    CHECK_THROWS_AS(load(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load(path), ConfigError);
}
