#include "homewifi/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace homewifi;
using nlohmann::json;

TEST_CASE("defaults round-trip")
{
    AppConfig d;
    auto j = to_json(d);
    AppConfig back = parse_config(json::parse(j.dump()));
    CHECK(to_json(back) == j);
    CHECK(back.perf.mac_5g.fixed_us() == doctest::Approx(189.5));
    CHECK(back.env.mcs.band_5g.entries.size() == 10);
}

TEST_CASE("shipped default config parses to the built-in defaults")
{
    AppConfig c = load_config(HOMEWIFI_DATA_DIR "/default_config.json");
    CHECK(to_json(c) == to_json(AppConfig{}));
}

TEST_CASE("overrides are read and echoed")
{
    auto j = json::parse(R"({
        "propagation": {"floor_penetration_db": 5},
        "selection": {"mechanism": "rssi", "alpha": 0.25, "tie_break": "lowest-id", "refresh": "frozen"},
        "traffic": {"per_sta_bps": 1.8e6, "external": {"channel": 6, "load_bps": 3e6}},
        "scenario": {"topology_kind": "home-2e", "channel_plan": "single", "k": 20, "seed": 9},
        "run": {"workers": 4, "k": 7}
    })");
    AppConfig c = parse_config(j);
    CHECK(c.env.propagation.floor_penetration_db == 5);
    CHECK(c.run.env.propagation.floor_penetration_db == 5);
    CHECK(c.selection.mechanism == Mechanism::RssiBased);
    CHECK(c.selection.alpha == 0.25);
    CHECK(c.selection.tie_break == TieBreak::LowestId);
    CHECK(c.selection.refresh == LoadRefresh::FrozenSnapshot);
    CHECK(c.external.channel == ChannelId{Band::Band2G4, 6});
    REQUIRE(c.scenario);
    CHECK(c.scenario->n_extenders == 2);
    CHECK(c.scenario->deployment_area == DeploymentArea::HomeRect);
    CHECK(c.run.workers == 4);
    CHECK(c.run.overrides.k == 7u);

    SweepPoint p = scenario_point(c);
    CHECK(p.traffic.total_load_bps() == doctest::Approx(18e6));
    CHECK(p.scenario.k == 20);

    CHECK(parse_config(json::parse(to_json(c).dump())).scenario->seed == 9);
}

TEST_CASE("unknown keys and bad values are rejected")
{
    CHECK_THROWS_AS(parse_config(json::parse(R"({"selection": {"alfa": 0.5}})")), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"plots": {}})")), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"selection": {"alpha": "high"}})")), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"selection": {"alpha": 1.5}})")), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"topology_kind": "star"}})")), std::invalid_argument);
    CHECK_THROWS_AS(scenario_point(AppConfig{}), std::invalid_argument);
}

TEST_CASE("file errors name the path")
{
    auto p = std::filesystem::temp_directory_path() / "homewifi-broken-config.json";
    {
        std::ofstream(p) << "{ \"run\": ";
    }
    try {
        load_config(p);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
    }
    std::filesystem::remove(p);
    CHECK_THROWS_AS(load_config("/nonexistent/homewifi.json"), std::runtime_error);
}
