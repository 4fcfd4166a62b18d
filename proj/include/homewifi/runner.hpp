#pragma once

#include "homewifi/perf.hpp"
#include "homewifi/protocol.hpp"
#include "homewifi/radio.hpp"
#include "homewifi/scenarios.hpp"
#include "homewifi/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace homewifi {

struct RunOverrides {
    std::optional<double> alpha;
    std::optional<double> beta_pct;
    std::optional<std::size_t> k;
    std::optional<Mechanism> mechanism;
    std::optional<ChannelPlan> channels;
};

struct RunConfig {
    std::string test_id;
    std::optional<std::filesystem::path> scenario_file;
    std::uint64_t seed = 1;
    RunOverrides overrides;
    std::filesystem::path out_dir = "out";
    bool export_csv = true;
    bool export_json = true;
    bool emit_events = false;
    unsigned workers = 1;
    RadioEnvironment env{};
    PerfParams perf{};
};

/// Throws std::invalid_argument when k is zero or the worker count is zero.
void validate(const RunConfig& cfg);

/// Applies overrides and the run seed to every point.
std::vector<SweepPoint> apply_overrides(std::vector<SweepPoint> points, const RunConfig& cfg);

struct ResultRow {
    std::string test_id;
    std::size_t point = 0;
    std::string topology;
    int n_ext = 0;
    std::string channel_plan;
    std::optional<double> rssi_ap_e_dbm;
    double b_ext_bps = 0.0;
    std::size_t deployment_index = 0;
    Mechanism mechanism = Mechanism::RssiBased;
    double alpha = 0.0;
    double beta_pct = 0.0;
    double b_t_bps = 0.0;
    double throughput_pct = 100.0;
    double avg_delay_ms = 0.0;
    bool congested = false;
    /// Every STA in id order; nullopt when unassociated.
    std::vector<std::pair<NodeId, std::optional<NodeId>>> associations;
};

struct Aggregate {
    std::string test_id;
    std::size_t point = 0;
    std::string topology;
    int n_ext = 0;
    std::string channel_plan;
    std::optional<double> rssi_ap_e_dbm;
    double b_ext_bps = 0.0;
    Mechanism mechanism = Mechanism::RssiBased;
    double alpha = 0.0;
    double beta_pct = 0.0;
    double b_t_bps = 0.0;
    std::size_t k = 0;
    double mean_throughput_pct = 0.0;
    double mean_delay_ms = 0.0;
    double pct_congested = 0.0;
    /// Associated STAs over all STAs, across deployments.
    double association_rate_pct = 0.0;
};

/// One deployment of one sweep point. With `log` set the full frame exchange
/// runs and is recorded; otherwise the assignment-level fast path is used.
ResultRow evaluate_deployment(const SweepPoint& point, const Topology& skeleton, std::size_t deployment_index,
                              const RadioEnvironment& env, const PerfParams& perf, EventLog* log = nullptr);

struct RunResult {
    std::vector<ResultRow> rows;  // only filled when requested
    std::vector<Aggregate> aggregates;
};

using RowSink = std::function<void(const ResultRow&)>;
using EventSink = std::function<void(const ResultRow&, const EventLog&)>;

struct RunHooks {
    RowSink on_row;
    /// Set to run the frame-level protocol and receive every deployment's log.
    EventSink on_events;
    bool keep_rows = false;
};

/// Evaluates every (point, deployment) pair. Rows reach the sinks in
/// (point, deployment) order whatever the worker count.
RunResult run(const std::vector<SweepPoint>& points, const RunConfig& cfg, const RunHooks& hooks = {});

enum class RangeCriterion { Thr99, Delay10ms, NoCongestion };

std::string to_string(RangeCriterion c);
bool satisfies(const Aggregate& a, RangeCriterion c);

/// Upper end of the [0, B_T] interval over which every swept point meets the
/// criterion; 0 when the first point already fails. `ascending` must be one
/// configuration's aggregates sorted by B_T. Throws on an empty sweep.
double operational_range(const std::vector<Aggregate>& ascending, RangeCriterion c);

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Number formatting shared by every exporter (shortest round-trip form).
std::string format_number(double v);

std::vector<std::string> csv_header(const std::vector<NodeId>& stas);
std::string csv_line(const ResultRow& r);
std::vector<std::string> aggregate_csv_header();
std::string aggregate_csv_line(const Aggregate& a);

/// Streams rows to <out>/results.csv and <out>/results.json, aggregates to
/// <out>/aggregates.csv, and event logs to <out>/events/. Throws
/// std::runtime_error naming the path on I/O failure.
class Exporter {
public:
    Exporter(const RunConfig& cfg, std::vector<NodeId> stas);
    ~Exporter();

    void row(const ResultRow& r);
    void events(const ResultRow& r, const EventLog& log);
    void finish(const std::vector<Aggregate>& aggregates);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    bool csv_;
    bool json_;
    std::unique_ptr<std::ofstream> rows_csv_;
    std::unique_ptr<std::ofstream> rows_json_;
    bool first_json_row_ = true;
};

}  // namespace homewifi
