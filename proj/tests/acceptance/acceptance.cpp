// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is the number of failed criteria.

#include "homewifi/config.hpp"
#include "homewifi/protocol.hpp"
#include "homewifi/runner.hpp"
#include "homewifi/scenarios.hpp"
#include "homewifi/selection.hpp"
#include "../support/fixture_run.hpp"
#include "../support/perf_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace homewifi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunResult run_test(const std::string& id, bool keep_rows = false, std::optional<std::size_t> k = {})
{
    RunConfig cfg;
    cfg.workers = workers();
    cfg.overrides.k = k;
    RunHooks hooks;
    hooks.keep_rows = keep_rows;
    return run(apply_overrides(build_test(id), cfg), cfg, hooks);
}

// Ascending-B_T aggregates per configuration label.
using Series = std::map<std::string, std::vector<Aggregate>>;

Series by_config(const std::vector<Aggregate>& aggs, const std::function<bool(const Aggregate&)>& keep = {})
{
    Series out;
    for (const auto& a : aggs) {
        if (keep && !keep(a)) continue;
        out[a.topology + "/" + a.channel_plan + "/" + to_string(a.mechanism)].push_back(a);
    }
    for (auto& [name, v] : out)
        std::sort(v.begin(), v.end(), [](const Aggregate& x, const Aggregate& y) { return x.b_t_bps < y.b_t_bps; });
    return out;
}

double range_mbps(const Series& s, const std::string& name, RangeCriterion c)
{
    return operational_range(s.at(name), c) / 1e6;
}

// ---------------------------------------------------------------------------

Outcome coverage_rates()
{
    auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_test("1.2");
    double elapsed = seconds_since(t0);

    const double ref[] = {83.489, 90.330, 93.432, 90.330, 93.432};
    Outcome o{true, "", {}};
    std::string rates;
    for (std::size_t i = 0; i < 5; ++i) {
        const Aggregate& a = r.aggregates[i];
        double diff = a.association_rate_pct - ref[i];
        o.pass = o.pass && std::abs(diff) <= 1.0;
        o.details.push_back(fmt("%s %s: %.3f%% (ref %.3f%%, diff %+.3f pp)", a.topology.c_str(),
                                to_string(a.mechanism).c_str(), a.association_rate_pct, ref[i], diff));
    }
    bool equal = r.aggregates[1].association_rate_pct == r.aggregates[3].association_rate_pct &&
                 r.aggregates[2].association_rate_pct == r.aggregates[4].association_rate_pct;
    o.pass = o.pass && equal && elapsed < 30.0;
    o.summary = fmt("association rates within 1 pp, mechanisms %s, %.1f s (limit 30 s)",
                    equal ? "identical" : "DIFFER", elapsed);
    return o;
}

Outcome weighted_exactness()
{
    double mid = weighted_rssi(-35, 20, -90);
    double top = weighted_rssi(20, 20, -90);
    double bottom = weighted_rssi(-90, 20, -90);
    return {mid == 0.5 && top == 0.0 && bottom == 1.0,
            fmt("RSSI*(-35)=%.17g, RSSI*(P_t)=%.17g, RSSI*(S)=%.17g", mid, top, bottom),
            {}};
}

Outcome recomposition()
{
    Rng rng(0xe41);
    double worst = 0.0;
    std::size_t n = 0;
    Topology t;
    t.add_node(make_ap({0, 0}, {Band::Band2G4, 1}));
    t.add_node(make_extender(NodeId{1}, {20, 0}, {Band::Band2G4, 6}));
    t.add_node(make_extender(NodeId{2}, {40, 0}, {Band::Band2G4, 11}));
    t.set_backhaul_parent(NodeId{1}, kApId);
    t.set_backhaul_parent(NodeId{2}, NodeId{1});
    t.add_node(make_sta(sta_id(1), {0, 0}));
    while (n < 1000) {
        RssiOverrides o{{{kApId, NodeId{1}}, -70}, {{NodeId{1}, NodeId{2}}, -70}};
        for (std::uint32_t a = 0; a < 3; ++a) o[{NodeId{a}, sta_id(1)}] = rng.uniform(-89.9, 25);
        LinkBudget links(t, RadioEnvironment{}, o);
        LoadMap loads{{{Band::Band2G4, 1}, rng.uniform01()},
                      {{Band::Band2G4, 6}, rng.uniform01()},
                      {{Band::Band2G4, 11}, rng.uniform01()},
                      {kBackhaulChannel, rng.uniform01()}};
        SelectionConfig cfg;
        cfg.alpha = rng.uniform01();
        NodeId target{static_cast<std::uint32_t>(rng.below(3))};
        CandidateScore s = score(t, links, sta_id(1), target, loads, cfg);
        double again = cfg.alpha * (s.weighted_rssi + s.access_load) + (1 - cfg.alpha) * s.backhaul_load_sum;
        worst = std::max(worst, std::abs(again - s.score));
        ++n;
    }
    return {worst <= 1e-12, fmt("%zu scores, max |Y - recomposed| = %.3g", n, worst), {}};
}

Outcome range_constants()
{
    const double dmax = coverage_radius_m();
    const double d70 = max_range_m(make_ap({}, {Band::Band2G4, 1}).backhaul_radio(), -70.0);
    return {dmax >= 186 && dmax <= 187 && d70 >= 26 && d70 <= 27,
            fmt("D_max = %.4f m, d(-70 dBm, 5 GHz) = %.4f m", dmax, d70),
            {}};
}

Outcome mcs_anchor()
{
    auto c = mcs_for_rssi(default_mcs_table_5g(), -77.0, 2);
    return {c && c->mcs == 1, c ? fmt("-77 dBm -> MCS %d", c->mcs) : std::string("-77 dBm -> no MCS"), {}};
}

Outcome equivalence()
{
    Outcome o{true, "", {}};

    // beta = 0 against RSSI-based, over every configuration with Extenders
    std::size_t rows = 0, beta_diff = 0;
    {
        RunConfig cfg;
        cfg.workers = workers();
        cfg.overrides.k = 100;
        std::vector<SweepPoint> rb;
        for (const std::string id : {"1.3", "2.1"})
            for (const auto& p : build_test(id))
                if (p.selection.mechanism == Mechanism::RssiBased && p.scenario.n_extenders > 0 && p.index % 40 < 9)
                    rb.push_back(p);
        auto la = rb;
        for (auto& p : la) {
            p.selection.mechanism = Mechanism::LoadAware;
            p.selection.beta_pct = 0.0;
        }
        RunHooks keep;
        keep.keep_rows = true;
        auto a = run(apply_overrides(rb, cfg), cfg, keep);
        auto b = run(apply_overrides(la, cfg), cfg, keep);
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            ResultRow x = b.rows[i];
            x.mechanism = a.rows[i].mechanism;
            x.beta_pct = a.rows[i].beta_pct;
            beta_diff += csv_line(x) != csv_line(a.rows[i]);
            ++rows;
        }
    }
    o.details.push_back(fmt("beta=0 LoadAware vs RSSI-based: %zu deployments, %zu differ", rows, beta_diff));

    // alpha = 1 on a single access channel picks the strongest target
    std::size_t stas = 0, argmax_diff = 0;
    for (const std::string id : {"1.1", "2.1"}) {
        for (const auto& p : build_test(id)) {
            if (p.scenario.channel_plan != ChannelPlan::Single || p.selection.mechanism != Mechanism::LoadAware ||
                p.index % 13 != 0)
                continue;
            Topology skel = build_topology(p.scenario);
            for (std::size_t d = 0; d < 20; ++d) {
                Topology t = add_stas(skel, sample_deployment(p.scenario, d), {});
                LinkBudget links(t, RadioEnvironment{});
                for (NodeId s : t.stas())
                    if (auto b = best_rssi_target(links, s)) t.associate(s, *b);
                std::vector<ExternalLoad> ext;
                PerfParams pp;
                LoadContext ctx{links, p.traffic, ext, pp};
                SelectionConfig la = p.selection;
                la.alpha = 1.0;
                SelectionConfig rb = la;
                rb.mechanism = Mechanism::RssiBased;
                for (NodeId s : t.stas()) {
                    auto x = rank_candidates(s, t, ctx, la);
                    if (x.empty()) continue;
                    ++stas;
                    argmax_diff += x.entries.front().target != rank_candidates(s, t, ctx, rb).entries.front().target;
                }
            }
        }
    }
    o.details.push_back(fmt("alpha=1 single-channel top candidate vs argmax RSSI: %zu STAs, %zu differ", stas,
                            argmax_diff));

    // four-stage protocol against the direct pass
    std::size_t deployments = 0, comp_diff = 0;
    for (const std::string id : {"1.3", "2.1", "2.2", "2.3", "2.4"}) {
        for (const auto& p : build_test(id)) {
            if (p.selection.mechanism != Mechanism::LoadAware || p.index % 7 != 0) continue;
            Topology skel = build_topology(p.scenario);
            for (std::size_t d = 0; d < std::min<std::size_t>(p.scenario.k, 10); ++d) {
                EventLog log;
                ResultRow slow = evaluate_deployment(p, skel, d, RadioEnvironment{}, PerfParams{}, &log);
                ResultRow fast = evaluate_deployment(p, skel, d, RadioEnvironment{}, PerfParams{});
                comp_diff += csv_line(slow) != csv_line(fast) || !stage_order_violations(log).empty();
                ++deployments;
            }
        }
    }
    o.details.push_back(fmt("four-stage exchange vs direct reassociation pass: %zu deployments, %zu differ",
                            deployments, comp_diff));

    o.pass = beta_diff == 0 && argmax_diff == 0 && comp_diff == 0 && rows > 0 && stas > 0 && deployments > 0;
    o.summary = fmt("%zu + %zu + %zu comparisons, %zu mismatches", rows, stas, deployments,
                    beta_diff + argmax_diff + comp_diff);
    return o;
}

Outcome testbed_fixture()
{
    Fixture f = table6_fixture();
    Outcome o{true, "", {}};
    std::size_t exact = 0, la_cases = 0;
    for (const auto& c : f.cases) {
        auto got = homewifi::testing::run_fixture_case(f, c);
        std::string diff;
        for (const auto& [s, p] : got)
            if (c.expected.at(s) != p)
                diff += fmt(" STA%u %s->%s", s.value - kStaIdBase, c.expected.at(s) == kApId ? "AP" : "E",
                            p == kApId ? "AP" : "E");
        if (c.mechanism == Mechanism::RssiBased) {
            o.pass = o.pass && diff.empty();
            exact += diff.empty();
        } else {
            ++la_cases;
            auto on_e = std::count_if(got.begin(), got.end(), [&](const auto& kv) { return kv.second == f.extender; });
            o.pass = o.pass && on_e >= 1;
            o.details.push_back(fmt("%s: %ld STA(s) on the Extender, %s%s", c.name.c_str(), static_cast<long>(on_e),
                                    diff.empty() ? "matches the reference" : "differs from the reference (ref->model):",
                                    diff.c_str()));
        }
    }
    o.summary = fmt("%zu/3 RSSI-based columns exact, %zu LoadAware cases checked for an Extender STA", exact,
                    la_cases);
    return o;
}

Outcome test13()
{
    auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_test("1.3");
    double elapsed = seconds_since(t0);
    Series s = by_config(r.aggregates);
    const auto nc = RangeCriterion::NoCongestion;
    double none = range_mbps(s, "circle-0e/multi/rssi", nc);
    double rb2 = range_mbps(s, "circle-2e/multi/rssi", nc), rb4 = range_mbps(s, "circle-4e/multi/rssi", nc);
    double la2 = range_mbps(s, "circle-2e/multi/loadaware", nc), la4 = range_mbps(s, "circle-4e/multi/loadaware", nc);

    bool order = none < std::min(rb2, rb4) && std::max(rb2, rb4) < std::min(la2, la4);
    double ratio2 = la2 / rb2, ratio4 = la4 / rb4;
    Outcome o;
    o.pass = order && ratio2 >= 1.35 && ratio4 >= 1.35 && elapsed < 300.0;
    o.summary = fmt("no-congestion ranges 0E %.2f < RSSI {2E %.2f, 4E %.2f} < LA {2E %.2f, 4E %.2f} Mbps: %s; "
                    "LA/RSSI 2E %.2f, 4E %.2f; %.0f s",
                    none, rb2, rb4, la2, la4, order ? "holds" : "VIOLATED", ratio2, ratio4, elapsed);

    // reference ranges, informational
    struct Row {
        const char* name;
        double ref[3];
    };
    const Row rows[] = {{"circle-4e/multi/rssi", {28.20, 20.04, 17.16}},
                        {"circle-2e/multi/rssi", {29.40, 20.76, 16.44}},
                        {"circle-4e/multi/loadaware", {34.56, 30.12, 27.12}},
                        {"circle-2e/multi/loadaware", {34.32, 29.88, 25.44}},
                        {"circle-0e/multi/rssi", {15.96, 14.16, 13.20}}};
    const RangeCriterion crit[] = {RangeCriterion::Thr99, RangeCriterion::Delay10ms, RangeCriterion::NoCongestion};
    for (const auto& row : rows) {
        std::string line = fmt("%-26s", row.name);
        for (int c = 0; c < 3; ++c) {
            double got = range_mbps(s, row.name, crit[c]);
            double rel = (got - row.ref[c]) / row.ref[c];
            line += fmt("  %s %.2f (ref %.2f, %+.0f%%%s)", to_string(crit[c]).c_str(), got, row.ref[c],
                        100 * rel, std::abs(rel) <= 0.30 ? "" : ", outside 30%");
        }
        o.details.push_back(line);
    }
    return o;
}

Outcome test21()
{
    RunResult r = run_test("2.1");
    Series s = by_config(r.aggregates);
    const auto nc = RangeCriterion::NoCongestion;
    Outcome o{true, "", {}};
    std::string summary;
    for (const char* m : {"rssi", "loadaware"}) {
        double one = range_mbps(s, std::string("home-1e/single/") + m, nc);
        double two = range_mbps(s, std::string("home-2e/single/") + m, nc);
        double change = std::abs(two - one) / one;
        o.pass = o.pass && change < 0.10;
        summary += fmt("%s%s 1E %.2f -> 2E %.2f Mbps (%.1f%%)", summary.empty() ? "" : "; ", m, one, two,
                       100 * change);
    }
    o.summary = "single-channel no-congestion range change under 10%: " + summary;

    // reference ranges, informational
    struct Row {
        const char* name;
        double ref[3];
    };
    const Row rows[] = {{"home-2e/multi/rssi", {35.88, 38.04, 19.44}},
                        {"home-1e/multi/rssi", {35.88, 34.68, 19.44}},
                        {"home-2e/multi/loadaware", {53.64, 48.36, 32.40}},
                        {"home-1e/multi/loadaware", {48.96, 44.28, 37.44}},
                        {"home-2e/single/rssi", {34.80, 32.64, 19.44}},
                        {"home-1e/single/rssi", {33.72, 31.08, 19.44}},
                        {"home-2e/single/loadaware", {30.60, 27.84, 25.20}},
                        {"home-1e/single/loadaware", {29.88, 27.12, 24.12}},
                        {"home-0e/multi/rssi", {28.80, 26.28, 23.76}}};
    const RangeCriterion crit[] = {RangeCriterion::Thr99, RangeCriterion::Delay10ms, RangeCriterion::NoCongestion};
    for (const auto& row : rows) {
        std::string line = fmt("%-25s", row.name);
        for (int c = 0; c < 3; ++c)
            line += fmt("  %s %.2f (ref %.2f)", to_string(crit[c]).c_str(), range_mbps(s, row.name, crit[c]),
                        row.ref[c]);
        o.details.push_back(line);
    }
    return o;
}

Outcome perf_properties()
{
    using namespace homewifi::testing;
    Rng rng(0xacce97);
    PerfParams pp;
    std::size_t conservation = 0, oracle = 0, clamp = 0, monotone = 0, uncongested = 0;
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        Instance in = random_instance(rng);
        LinkBudget links(in.t, RadioEnvironment{}, in.rssi);
        PerfReport r = evaluate(in.t, links, in.traffic, in.external, pp);
        Oracle o = brute_force(in, links, pp);
        for (const auto& [sta, s] : r.per_sta) {
            double err = std::abs(s.delivered_bps - o.delivered.at(sta)) / s.offered_bps;
            worst = std::max(worst, err);
            oracle += err > 1e-9;
        }
        if (!r.congested) {
            ++uncongested;
            for (const auto& [sta, s] : r.per_sta) conservation += s.delivered_bps != s.offered_bps;
            conservation += r.network_throughput_pct != 100.0;
        }
        for (const auto& [c, ch] : r.per_channel) clamp += !(ch.busy_fraction >= 0.0 && ch.busy_fraction <= 1.0);
        for (const ChannelId& c : {kCh1, kCh6, kBackhaulChannel}) {
            double prev = 0.0;
            for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                TrafficProfile tp(in.traffic.per_sta_load_bps() * scale, in.traffic.n_sta());
                auto ext = in.external;
                for (auto& e : ext) e.load_bps *= scale;
                double b = busy_fraction(in.t, links, tp, ext, pp, c);
                monotone += b < prev;
                clamp += b > 1.0;
                prev = b;
            }
        }
    }
    return {conservation + oracle + clamp + monotone == 0 && uncongested > 0,
            fmt("1000 instances (%zu uncongested): conservation %zu, oracle %zu (max rel err %.2g), clamp %zu, "
                "monotonicity %zu violations",
                uncongested, conservation, oracle, worst, clamp, monotone),
            {}};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism()
{
    auto dir = fs::temp_directory_path() / "homewifi-acceptance";
    std::vector<std::string> csv;
    for (unsigned w : {1u, 8u}) {
        RunConfig cfg;
        cfg.seed = 2024;
        cfg.workers = w;
        cfg.overrides.k = 200;
        cfg.out_dir = dir / std::to_string(w);
        fs::remove_all(cfg.out_dir);
        auto points = apply_overrides(build_test("2.3"), cfg);
        std::vector<NodeId> stas;
        for (std::uint32_t i = 1; i <= points.front().scenario.n_sta; ++i) stas.push_back(sta_id(i));
        Exporter ex(cfg, stas);
        RunHooks hooks;
        hooks.on_row = [&](const ResultRow& r) { ex.row(r); };
        ex.finish(run(points, cfg, hooks).aggregates);
        csv.push_back(slurp(cfg.out_dir / "results.csv") + slurp(cfg.out_dir / "aggregates.csv"));
    }
    fs::remove_all(dir);
    return {csv[0] == csv[1] && !csv[0].empty(),
            fmt("Test 2.3 at k=200 (8000 rows): 1 vs 8 workers %s (%zu bytes)",
                csv[0] == csv[1] ? "byte-identical" : "DIFFER", csv[0].size()),
            {}};
}

Outcome test24()
{
    RunResult r = run_test("2.4", true);
    // point layout per B_EXT step: 0E RSSI, 1E RSSI, 1E LA at alpha 0.5, 0.75, 1
    std::map<double, const Aggregate*> rssi;
    std::map<double, std::map<double, const Aggregate*>> la;
    for (const auto& a : r.aggregates) {
        if (a.n_ext != 1) continue;
        if (a.mechanism == Mechanism::RssiBased) rssi[a.b_ext_bps] = &a;
        else la[a.alpha][a.b_ext_bps] = &a;
    }
    std::map<double, std::map<double, const ResultRow*>> la_rows;
    for (const auto& row : r.rows)
        if (row.n_ext == 1 && row.mechanism == Mechanism::LoadAware) la_rows[row.alpha][row.b_ext_bps] = &row;

    Outcome o;
    std::size_t points = 0, worse = 0, jumps = 0;
    for (const auto& [alpha, series] : la) {
        std::string bad;
        for (const auto& [bext, a] : series) {
            ++points;
            if (a->mean_delay_ms > rssi.at(bext)->mean_delay_ms) {
                ++worse;
                bad += fmt(" %.2f", bext / 1e6);
            }
        }
        std::string flips;
        const ResultRow* prev = nullptr;
        for (const auto& [bext, row] : la_rows[alpha]) {
            if (prev)
                for (std::size_t i = 0; i < row->associations.size(); ++i)
                    if (row->associations[i].second != prev->associations[i].second) {
                        ++jumps;
                        flips += fmt(" STA%u@%.2f", row->associations[i].first.value - kStaIdBase, bext / 1e6);
                    }
            prev = row;
        }
        o.details.push_back(fmt("alpha %.2f: LA delay above RSSI-based at B_EXT (Mbps):%s; parent changes:%s", alpha,
                                bad.empty() ? " none" : bad.c_str(), flips.empty() ? " none" : flips.c_str()));
    }
    o.pass = worse == 0 && jumps > 0;
    o.summary = fmt("%zu LoadAware points, %zu with higher delay than RSSI-based; %zu discrete parent changes", points,
                    worse, jumps);
    return o;
}

}  // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {"coverage association rates", coverage_rates},
        {"weighted RSSI exactness", weighted_exactness},
        {"score recomposition", recomposition},
        {"range constants", range_constants},
        {"MCS anchor", mcs_anchor},
        {"equivalence suite", equivalence},
        {"testbed fixture", testbed_fixture},
        {"Test 1.3 operational-range ordering", test13},
        {"Test 2.1 single-channel second Extender", test21},
        {"perf-model property suite", perf_properties},
        {"determinism across worker counts", determinism},
        {"Test 2.4 external interference", test24},
    };

    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what(), {}};
        }
        failed += !o.pass;
        std::printf("%s %2d. %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.summary.c_str());
        for (const auto& d : o.details) std::printf("       %s\n", d.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed;
}
