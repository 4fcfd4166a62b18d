#pragma once

#include "homewifi/perf.hpp"
#include "homewifi/radio.hpp"
#include "homewifi/runner.hpp"
#include "homewifi/scenarios.hpp"
#include "homewifi/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace homewifi {

/// Contents of a config file. Every section is optional; absent keys keep
/// their defaults and unknown keys are rejected.
struct AppConfig {
    RadioEnvironment env{};
    PerfParams perf{};
    std::optional<ScenarioSpec> scenario;
    SelectionConfig selection{};
    double per_sta_bps = 2.4e6;
    double packet_length_bits = 12000.0;
    ExternalLoad external{};
    RunConfig run{};
};

AppConfig parse_config(const nlohmann::json& j);
nlohmann::ordered_json to_json(const AppConfig& c);

/// Throws std::runtime_error with the path and parser message on failure.
AppConfig load_config(const std::filesystem::path& p);

/// Single sweep point described by the scenario, selection and traffic sections.
SweepPoint scenario_point(const AppConfig& c);

/// Per-test summary of build_test: point count, k, and the distinct configurations.
nlohmann::ordered_json grid_manifest();

}  // namespace homewifi
