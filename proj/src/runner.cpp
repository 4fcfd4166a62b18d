#include "homewifi/runner.hpp"

#include "homewifi/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace homewifi {

void validate(const RunConfig& cfg)
{
    if (cfg.workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (cfg.overrides.k && *cfg.overrides.k < 1) throw std::invalid_argument("k must be at least 1");
    if (cfg.overrides.alpha && !(*cfg.overrides.alpha >= 0.0 && *cfg.overrides.alpha <= 1.0))
        throw std::invalid_argument("alpha must be in [0, 1]");
    if (cfg.overrides.beta_pct && !(*cfg.overrides.beta_pct >= 0.0 && *cfg.overrides.beta_pct <= 100.0))
        throw std::invalid_argument("beta must be in [0, 100] %");
    validate(cfg.env.propagation);
    validate(cfg.env.mcs.band_2g4);
    validate(cfg.env.mcs.band_5g);
    validate(cfg.perf.mac_2g4);
    validate(cfg.perf.mac_5g);
}

std::vector<SweepPoint> apply_overrides(std::vector<SweepPoint> points, const RunConfig& cfg)
{
    const RunOverrides& o = cfg.overrides;
    for (auto& p : points) {
        p.scenario.seed = cfg.seed;
        if (o.k) p.scenario.k = *o.k;
        if (o.mechanism) p.selection.mechanism = *o.mechanism;
        if (o.alpha) p.selection.alpha = *o.alpha;
        if (o.beta_pct) p.selection.beta_pct = *o.beta_pct;
        if (o.channels && p.scenario.channel_plan != *o.channels) {
            p.scenario.channel_plan = *o.channels;
            p.scenario.name = to_string(p.scenario.topology_kind) + "-" + to_string(*o.channels);
            p.scenario.access_channels.clear();
        }
        validate(p.scenario);
        validate(p.selection);
    }
    return points;
}

namespace {

// Capable-STA draws use their own stream so positions do not depend on beta.
constexpr std::uint64_t kCapableSalt = 0x6b76'6361'7061'626cULL;

std::set<NodeId> draw_capable(const SweepPoint& p, std::size_t deployment_index)
{
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < p.scenario.n_sta; ++i) ids.push_back(sta_id(static_cast<std::uint32_t>(i + 1)));
    Rng rng(substream_seed(p.scenario.seed ^ kCapableSalt, deployment_index));
    return sample_capable(ids, p.selection.beta_pct, rng);
}

ResultRow row_header(const SweepPoint& p, std::size_t deployment_index)
{
    ResultRow r;
    r.test_id = p.test_id;
    r.point = p.index;
    r.topology = to_string(p.scenario.topology_kind);
    r.n_ext = p.scenario.n_extenders;
    r.channel_plan = to_string(p.scenario.channel_plan);
    if (p.scenario.n_extenders > 0) r.rssi_ap_e_dbm = p.scenario.extender_rssi_dbm;
    r.b_ext_bps = p.external.load_bps;
    r.deployment_index = deployment_index;
    r.mechanism = p.selection.mechanism;
    r.alpha = p.selection.alpha;
    r.beta_pct = p.selection.beta_pct;
    r.b_t_bps = p.traffic.total_load_bps();
    return r;
}

}  // namespace

ResultRow evaluate_deployment(const SweepPoint& point, const Topology& skeleton, std::size_t deployment_index,
                              const RadioEnvironment& env, const PerfParams& perf, EventLog* log)
{
    ResultRow row = row_header(point, deployment_index);
    const auto capable = draw_capable(point, deployment_index);
    Topology t = add_stas(skeleton, sample_deployment(point.scenario, deployment_index, env), capable);
    const LinkBudget links(t, env);
    std::vector<ExternalLoad> external;
    if (point.external.load_bps > 0.0) external.push_back(point.external);

    if (log) {
        LoadContext ctx{links, point.traffic, external, perf};
        ProtocolRun pr = run_protocol(t, ctx, point.selection, capable);
        *log = std::move(pr.log);
        t = std::move(pr.topology);
    } else {
        for (NodeId sta : t.stas())
            if (auto target = best_rssi_target(links, sta, point.selection.tie_break)) t.associate(sta, *target);
    }

    const LoadModel model(t, links, point.traffic, external, perf);
    auto assignment = model.assignment(t);
    if (!log) reassociation_pass(model, assignment, point.selection, capable);
    const PerfSummary s = model.summarize(assignment);

    row.throughput_pct = s.network_throughput_pct;
    row.avg_delay_ms = s.avg_delay_ms;
    row.congested = s.congested;
    for (std::size_t i = 0; i < model.stas().size(); ++i) {
        int a = assignment[i];
        std::optional<NodeId> parent;
        if (a >= 0) parent = model.targets()[static_cast<std::size_t>(a)];
        row.associations.emplace_back(model.stas()[i], parent);
    }
    return row;
}

namespace {

struct Accumulator {
    double throughput = 0.0;
    double delay = 0.0;
    std::size_t congested = 0;
    std::size_t rows = 0;
    std::size_t associated = 0;
    std::size_t stas = 0;

    void add(const ResultRow& r)
    {
        throughput += r.throughput_pct;
        delay += r.avg_delay_ms;
        congested += r.congested ? 1 : 0;
        ++rows;
        for (const auto& [sta, parent] : r.associations) {
            ++stas;
            associated += parent ? 1 : 0;
        }
    }
};

Aggregate finish_aggregate(const SweepPoint& p, const Accumulator& acc)
{
    ResultRow h = row_header(p, 0);
    Aggregate a;
    a.test_id = h.test_id;
    a.point = h.point;
    a.topology = h.topology;
    a.n_ext = h.n_ext;
    a.channel_plan = h.channel_plan;
    a.rssi_ap_e_dbm = h.rssi_ap_e_dbm;
    a.b_ext_bps = h.b_ext_bps;
    a.mechanism = h.mechanism;
    a.alpha = h.alpha;
    a.beta_pct = h.beta_pct;
    a.b_t_bps = h.b_t_bps;
    a.k = acc.rows;
    const double n = static_cast<double>(acc.rows);
    a.mean_throughput_pct = acc.throughput / n;
    a.mean_delay_ms = acc.delay / n;
    a.pct_congested = 100.0 * static_cast<double>(acc.congested) / n;
    a.association_rate_pct =
        acc.stas ? 100.0 * static_cast<double>(acc.associated) / static_cast<double>(acc.stas) : 100.0;
    return a;
}

constexpr std::size_t kBlock = 4096;

}  // namespace

RunResult run(const std::vector<SweepPoint>& points, const RunConfig& cfg, const RunHooks& hooks)
{
    validate(cfg);
    std::vector<Topology> skeletons;
    std::vector<std::size_t> first_task{0};
    for (const auto& p : points) {
        validate(p.scenario);
        validate(p.selection);
        skeletons.push_back(build_topology(p.scenario, cfg.env));
        first_task.push_back(first_task.back() + p.scenario.k);
    }
    const std::size_t n_tasks = first_task.back();
    const bool with_events = static_cast<bool>(hooks.on_events);

    RunResult result;
    std::vector<Accumulator> acc(points.size());
    std::vector<ResultRow> rows;
    std::vector<EventLog> logs;

    for (std::size_t begin = 0; begin < n_tasks; begin += kBlock) {
        const std::size_t end = std::min(n_tasks, begin + kBlock);
        rows.assign(end - begin, {});
        if (with_events) logs.assign(end - begin, {});

        std::atomic<std::size_t> next{begin};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            try {
                for (std::size_t task = next++; task < end; task = next++) {
                    auto it = std::upper_bound(first_task.begin(), first_task.end(), task);
                    std::size_t pi = static_cast<std::size_t>(it - first_task.begin()) - 1;
                    std::size_t dep = task - first_task[pi];
                    EventLog* log = with_events ? &logs[task - begin] : nullptr;
                    rows[task - begin] = evaluate_deployment(points[pi], skeletons[pi], dep, cfg.env, cfg.perf, log);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = end;
            }
        };

        const unsigned n_workers = std::min<std::size_t>(cfg.workers, end - begin);
        if (n_workers <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        }
        if (failure) std::rethrow_exception(failure);

        for (std::size_t i = 0; i < rows.size(); ++i) {
            const ResultRow& r = rows[i];
            auto it = std::upper_bound(first_task.begin(), first_task.end(), begin + i);
            std::size_t pi = static_cast<std::size_t>(it - first_task.begin()) - 1;
            acc[pi].add(r);
            if (hooks.on_row) hooks.on_row(r);
            if (with_events) hooks.on_events(r, logs[i]);
            if (hooks.keep_rows) result.rows.push_back(r);
        }
    }

    for (std::size_t pi = 0; pi < points.size(); ++pi) result.aggregates.push_back(finish_aggregate(points[pi], acc[pi]));
    return result;
}

std::string to_string(RangeCriterion c)
{
    switch (c) {
    case RangeCriterion::Thr99: return "throughput>=99%";
    case RangeCriterion::Delay10ms: return "delay<=10ms";
    case RangeCriterion::NoCongestion: return "no-congestion";
    }
    return "?";
}

bool satisfies(const Aggregate& a, RangeCriterion c)
{
    switch (c) {
    case RangeCriterion::Thr99: return a.mean_throughput_pct >= 99.0;
    case RangeCriterion::Delay10ms: return a.mean_delay_ms <= 10.0;
    case RangeCriterion::NoCongestion: return a.pct_congested == 0.0;
    }
    return false;
}

double operational_range(const std::vector<Aggregate>& ascending, RangeCriterion c)
{
    if (ascending.empty()) throw std::invalid_argument("operational_range: empty sweep");
    double best = 0.0;
    for (const auto& a : ascending) {
        if (!satisfies(a, c)) break;
        best = a.b_t_bps;
    }
    return best;
}

// ---------------------------------------------------------------------------

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string opt_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : "-";
}

void write_line(std::ostream& os, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << fields[i];
    }
    os << '\n';
}

std::string join(const std::vector<std::string>& fields)
{
    std::ostringstream os;
    write_line(os, fields);
    std::string s = os.str();
    s.pop_back();
    return s;
}

std::unique_ptr<std::ofstream> open_out(const std::filesystem::path& p)
{
    auto f = std::make_unique<std::ofstream>(p, std::ios::binary | std::ios::trunc);
    if (!*f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return f;
}

void check(std::ostream& os, const std::filesystem::path& p)
{
    if (!os) throw std::runtime_error("write failed: " + p.string());
}

nlohmann::ordered_json row_json(const ResultRow& r)
{
    nlohmann::ordered_json j;
    j["test_id"] = r.test_id;
    j["point"] = r.point;
    j["topology"] = r.topology;
    j["n_ext"] = r.n_ext;
    j["channel_plan"] = r.channel_plan;
    j["rssi_ap_e_dbm"] = r.rssi_ap_e_dbm ? nlohmann::ordered_json(*r.rssi_ap_e_dbm) : nullptr;
    j["b_ext_bps"] = r.b_ext_bps;
    j["deployment_index"] = r.deployment_index;
    j["mechanism"] = to_string(r.mechanism);
    j["alpha"] = r.alpha;
    j["beta_pct"] = r.beta_pct;
    j["b_t_bps"] = r.b_t_bps;
    j["throughput_pct"] = r.throughput_pct;
    j["avg_delay_ms"] = r.avg_delay_ms;
    j["congested"] = r.congested;
    nlohmann::ordered_json assoc = nlohmann::ordered_json::object();
    for (const auto& [sta, parent] : r.associations)
        assoc["sta_" + std::to_string(sta.value - kStaIdBase)] = parent ? nlohmann::ordered_json(parent->value) : nullptr;
    j["associations"] = assoc;
    return j;
}

nlohmann::ordered_json aggregate_json(const Aggregate& a)
{
    nlohmann::ordered_json j;
    j["test_id"] = a.test_id;
    j["point"] = a.point;
    j["topology"] = a.topology;
    j["n_ext"] = a.n_ext;
    j["channel_plan"] = a.channel_plan;
    j["rssi_ap_e_dbm"] = a.rssi_ap_e_dbm ? nlohmann::ordered_json(*a.rssi_ap_e_dbm) : nullptr;
    j["b_ext_bps"] = a.b_ext_bps;
    j["mechanism"] = to_string(a.mechanism);
    j["alpha"] = a.alpha;
    j["beta_pct"] = a.beta_pct;
    j["b_t_bps"] = a.b_t_bps;
    j["k"] = a.k;
    j["mean_throughput_pct"] = a.mean_throughput_pct;
    j["mean_delay_ms"] = a.mean_delay_ms;
    j["pct_congested"] = a.pct_congested;
    j["association_rate_pct"] = a.association_rate_pct;
    return j;
}

}  // namespace

std::vector<std::string> csv_header(const std::vector<NodeId>& stas)
{
    std::vector<std::string> h{"test_id",   "point",        "topology",     "n_ext",       "channel_plan",
                               "rssi_ap_e_dbm", "b_ext_bps", "deployment_index", "mechanism", "alpha",
                               "beta_pct",  "b_t_bps",      "throughput_pct", "avg_delay_ms", "congested"};
    for (NodeId s : stas) h.push_back("sta_" + std::to_string(s.value - kStaIdBase));
    return h;
}

std::string csv_line(const ResultRow& r)
{
    std::vector<std::string> f{r.test_id,
                               std::to_string(r.point),
                               r.topology,
                               std::to_string(r.n_ext),
                               r.channel_plan,
                               opt_number(r.rssi_ap_e_dbm),
                               format_number(r.b_ext_bps),
                               std::to_string(r.deployment_index),
                               to_string(r.mechanism),
                               format_number(r.alpha),
                               format_number(r.beta_pct),
                               format_number(r.b_t_bps),
                               format_number(r.throughput_pct),
                               format_number(r.avg_delay_ms),
                               r.congested ? "1" : "0"};
    for (const auto& [sta, parent] : r.associations) f.push_back(parent ? std::to_string(parent->value) : "-");
    return join(f);
}

std::vector<std::string> aggregate_csv_header()
{
    return {"test_id",  "point",   "topology", "n_ext",          "channel_plan",
            "rssi_ap_e_dbm", "b_ext_bps", "mechanism", "alpha",   "beta_pct",
            "b_t_bps",  "k",       "mean_throughput_pct", "mean_delay_ms", "pct_congested",
            "association_rate_pct"};
}

std::string aggregate_csv_line(const Aggregate& a)
{
    return join({a.test_id, std::to_string(a.point), a.topology, std::to_string(a.n_ext), a.channel_plan,
                 opt_number(a.rssi_ap_e_dbm), format_number(a.b_ext_bps), to_string(a.mechanism),
                 format_number(a.alpha), format_number(a.beta_pct), format_number(a.b_t_bps), std::to_string(a.k),
                 format_number(a.mean_throughput_pct), format_number(a.mean_delay_ms),
                 format_number(a.pct_congested), format_number(a.association_rate_pct)});
}

Exporter::Exporter(const RunConfig& cfg, std::vector<NodeId> stas)
    : dir_(cfg.out_dir), csv_(cfg.export_csv), json_(cfg.export_json)
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    if (cfg.emit_events) {
        std::filesystem::create_directories(dir_ / "events", ec);
        if (ec) throw std::runtime_error("cannot create " + (dir_ / "events").string() + ": " + ec.message());
    }
    if (csv_) {
        rows_csv_ = open_out(dir_ / "results.csv");
        write_line(*rows_csv_, csv_header(stas));
    }
    if (json_) {
        rows_json_ = open_out(dir_ / "results.json");
        *rows_json_ << "{\"rows\":[";
    }
}

Exporter::~Exporter() = default;

void Exporter::row(const ResultRow& r)
{
    if (rows_csv_) {
        *rows_csv_ << csv_line(r) << '\n';
        check(*rows_csv_, dir_ / "results.csv");
    }
    if (rows_json_) {
        *rows_json_ << (first_json_row_ ? "\n" : ",\n") << row_json(r).dump();
        first_json_row_ = false;
        check(*rows_json_, dir_ / "results.json");
    }
}

void Exporter::events(const ResultRow& r, const EventLog& log)
{
    auto p = dir_ / "events" / ("test" + r.test_id + "_p" + std::to_string(r.point) + "_d" +
                                std::to_string(r.deployment_index) + ".jsonl");
    auto f = open_out(p);
    log.write_jsonl(*f);
    check(*f, p);
}

void Exporter::finish(const std::vector<Aggregate>& aggregates)
{
    if (rows_json_) {
        *rows_json_ << "\n],\"aggregates\":[";
        for (std::size_t i = 0; i < aggregates.size(); ++i)
            *rows_json_ << (i ? ",\n" : "\n") << aggregate_json(aggregates[i]).dump();
        *rows_json_ << "\n]}\n";
        rows_json_->flush();
        check(*rows_json_, dir_ / "results.json");
    }
    if (rows_csv_) {
        rows_csv_->flush();
        check(*rows_csv_, dir_ / "results.csv");
    }
    if (csv_) {
        auto p = dir_ / "aggregates.csv";
        auto f = open_out(p);
        write_line(*f, aggregate_csv_header());
        for (const auto& a : aggregates) *f << aggregate_csv_line(a) << '\n';
        f->flush();
        check(*f, p);
    }
}

}  // namespace homewifi
