#include "homewifi/config.hpp"
#include "homewifi/runner.hpp"
#include "homewifi/scenarios.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

using namespace homewifi;

namespace {

int cmd_run(const std::string& test, const std::string& config_path, const RunConfig& cli,
            const std::optional<std::string>& mechanism, const std::optional<std::string>& channels,
            const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& workers,
            const std::optional<std::string>& out, bool emit_events, bool no_csv, bool no_json)
{
    AppConfig app;
    if (!config_path.empty()) app = load_config(config_path);
    RunConfig cfg = app.run;
    if (!test.empty()) cfg.test_id = test;
    if (!config_path.empty()) cfg.scenario_file = config_path;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out) cfg.out_dir = *out;
    if (emit_events) cfg.emit_events = true;
    if (no_csv) cfg.export_csv = false;
    if (no_json) cfg.export_json = false;
    if (cli.overrides.alpha) cfg.overrides.alpha = cli.overrides.alpha;
    if (cli.overrides.beta_pct) cfg.overrides.beta_pct = cli.overrides.beta_pct;
    if (cli.overrides.k) cfg.overrides.k = cli.overrides.k;
    if (mechanism) cfg.overrides.mechanism = parse_mechanism(*mechanism);
    if (channels) cfg.overrides.channels = parse_channel_plan(*channels);
    validate(cfg);

    std::vector<SweepPoint> points;
    if (!cfg.test_id.empty()) {
        points = build_test(cfg.test_id);
    } else if (app.scenario) {
        points.push_back(scenario_point(app));
    } else {
        throw std::invalid_argument("nothing to run: give --test or a config with a scenario section");
    }
    if (!config_path.empty() && app.scenario && cfg.test_id.empty()) cfg.seed = seed.value_or(app.scenario->seed);
    points = apply_overrides(std::move(points), cfg);

    std::vector<NodeId> stas;
    for (std::size_t i = 0; i < points.front().scenario.n_sta; ++i) stas.push_back(sta_id(static_cast<std::uint32_t>(i + 1)));
    Exporter exporter(cfg, stas);

    RunHooks hooks;
    hooks.on_row = [&](const ResultRow& r) { exporter.row(r); };
    if (cfg.emit_events) hooks.on_events = [&](const ResultRow& r, const EventLog& log) { exporter.events(r, log); };

    auto t0 = std::chrono::steady_clock::now();
    RunResult res = run(points, cfg, hooks);
    exporter.finish(res.aggregates);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::size_t rows = 0;
    for (const auto& a : res.aggregates) rows += a.k;
    std::cout << "test " << (cfg.test_id.empty() ? std::string("custom") : cfg.test_id) << ": " << points.size()
              << " points, " << rows << " deployments in " << format_number(std::round(secs * 100) / 100) << " s\n";
    std::cout << "output: " << exporter.dir().string() << "\n";
    if (res.aggregates.size() <= 50) {
        std::cout << "point,topology,plan,mechanism,alpha,beta_pct,b_t_mbps,b_ext_mbps,thr_pct,delay_ms,congested_pct,assoc_pct\n";
        for (const auto& a : res.aggregates)
            std::cout << a.point << ',' << a.topology << ',' << a.channel_plan << ',' << to_string(a.mechanism) << ','
                      << format_number(a.alpha) << ',' << format_number(a.beta_pct) << ','
                      << format_number(a.b_t_bps / 1e6) << ',' << format_number(a.b_ext_bps / 1e6) << ','
                      << format_number(a.mean_throughput_pct) << ',' << format_number(a.mean_delay_ms) << ','
                      << format_number(a.pct_congested) << ',' << format_number(a.association_rate_pct) << '\n';
    }
    return 0;
}

int cmd_validate(const std::string& path)
{
    AppConfig app = load_config(path);
    if (!app.scenario) {
        std::cout << path << ": ok (no scenario section)\n";
        return 0;
    }
    if (app.scenario->topology_kind == TopologyKind::Fixture) throw std::invalid_argument("fixture scenarios cannot be generated");
    Topology skeleton = build_topology(*app.scenario, app.env);
    Topology t = add_stas(skeleton, sample_deployment(*app.scenario, 0, app.env), {});
    auto problems = validate_topology(t);
    for (const auto& v : problems)
        std::cerr << path << ": " << to_string(v.kind) << " at node " << v.node.value << ": " << v.detail << '\n';
    if (!problems.empty()) return 2;
    std::cout << path << ": ok (" << app.scenario->name << ", " << skeleton.access_points().size()
              << " AP/Extenders, " << app.scenario->n_sta << " STAs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-AP home WiFi simulator: RSSI-based vs channel-load-aware AP/Extender selection"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run a built-in test grid or a config scenario");
    std::string test, config_path;
    RunConfig cli;
    std::optional<double> alpha, beta;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> mechanism, channels, out;
    bool emit_events = false, no_csv = false, no_json = false;
    run_cmd->add_option("--test", test, "Test id")->check(CLI::IsMember(known_tests()));
    run_cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--alpha", alpha, "Override alpha")->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--beta", beta, "Override share of 802.11k/v capable STAs (%)")->check(CLI::Range(0.0, 100.0));
    run_cmd->add_option("--k", k, "Override deployments per point")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", seed, "Run seed");
    run_cmd->add_option("--mechanism", mechanism, "rssi|loadaware")->check(CLI::IsMember({"rssi", "loadaware"}));
    run_cmd->add_option("--channels", channels, "multi|single")->check(CLI::IsMember({"multi", "single"}));
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--emit-events", emit_events, "Write the 802.11k/v frame log of every deployment");
    run_cmd->add_flag("--no-csv", no_csv, "Skip CSV output");
    run_cmd->add_flag("--no-json", no_json, "Skip JSON output");

    auto* list_cmd = app.add_subcommand("list-tests", "Print the built-in test grid manifest");

    auto* validate_cmd = app.add_subcommand("validate", "Check a config file and its scenario");
    std::string scenario_path;
    validate_cmd->add_option("--scenario", scenario_path, "Config file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (alpha) cli.overrides.alpha = alpha;
            if (beta) cli.overrides.beta_pct = beta;
            if (k) cli.overrides.k = k;
            return cmd_run(test, config_path, cli, mechanism, channels, seed, workers, out, emit_events, no_csv,
                           no_json);
        }
        if (*list_cmd) {
            std::cout << grid_manifest().dump(2) << '\n';
            return 0;
        }
        if (*validate_cmd) return cmd_validate(scenario_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
