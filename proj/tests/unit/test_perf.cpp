#include "homewifi/perf.hpp"
#include "homewifi/rng.hpp"
#include "../support/perf_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace homewifi;
using homewifi::testing::Instance;
using homewifi::testing::Oracle;
using homewifi::testing::brute_force;
using homewifi::testing::random_instance;

namespace {

constexpr ChannelId ch1{Band::Band2G4, 1};
constexpr ChannelId ch6{Band::Band2G4, 6};

MacOverheads zero_mac()
{
    return MacOverheads{0, 0, 0, 0, 0, 0};
}

}  // namespace

TEST_CASE("airtime per packet")
{
    Flow f{};
    f.phy_rate_bps = 12e6;
    CHECK(flow_airtime_s(f, 12000, zero_mac()) == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(flow_airtime_s(f, 24000, zero_mac()) == doctest::Approx(2e-3).epsilon(1e-15));

    f.phy_rate_bps = 144.4e6;
    const auto mac = default_mac_overheads(Band::Band2G4);
    CHECK(mac.fixed_us() == doctest::Approx(177.5));
    CHECK(flow_airtime_s(f, 12000, mac) * 1e6 == doctest::Approx(260.6024930748).epsilon(1e-10));

    // tests/oracles/path_loss.py
    f.phy_rate_bps = 65e6;
    CHECK(flow_airtime_s(f, 12000, mac) * 1e6 == doctest::Approx(362.1153846154).epsilon(1e-10));
    f.phy_rate_bps = 390e6;
    CHECK(flow_airtime_s(f, 12000, default_mac_overheads(Band::Band5G)) * 1e6 ==
          doctest::Approx(220.2692307692).epsilon(1e-10));
}

TEST_CASE("flows aggregate up the backhaul tree")
{
    Topology t;
    t.add_node(make_ap({0, 0}, ch1));
    t.add_node(make_extender(NodeId{1}, {20, 0}, ch6));
    t.add_node(make_extender(NodeId{2}, {40, 0}, ch6));
    t.set_backhaul_parent(NodeId{1}, kApId);
    t.set_backhaul_parent(NodeId{2}, NodeId{1});
    t.add_node(make_sta(NodeId{101}, {21, 0}));
    t.add_node(make_sta(NodeId{102}, {41, 0}));
    t.associate(NodeId{101}, NodeId{1});
    t.associate(NodeId{102}, NodeId{2});

    RadioEnvironment env;
    auto flows = build_flows(t, TrafficProfile(1e6, 2), {{ch6, 12e6, 65e6}}, env);
    std::map<std::pair<NodeId, NodeId>, double> backhaul;
    int external = 0;
    for (const auto& f : flows) {
        if (f.hop_kind == HopKind::Backhaul) backhaul[{f.src, f.dst}] = f.offered_bps;
        if (f.hop_kind == HopKind::External) {
            ++external;
            CHECK(f.offered_bps == 12e6);
            CHECK(f.channel == ch6);
        }
    }
    CHECK(backhaul.at({NodeId{1}, kApId}) == 2e6);
    CHECK(backhaul.at({NodeId{2}, NodeId{1}}) == 1e6);
    CHECK(external == 1);
}

TEST_CASE("single STA next to the AP")
{
    Topology t;
    t.add_node(make_ap({0, 0}, ch1));
    t.add_node(make_sta(NodeId{101}, {2, 0}));
    t.associate(NodeId{101}, kApId);
    PerfParams pp;
    auto r = evaluate(t, TrafficProfile(1e6, 1), {}, RadioEnvironment{}, pp);
    const double T = 260.6024930748e-6;
    const double u = 1e6 / 12000 * T;
    CHECK(r.network_throughput_pct == 100.0);
    CHECK_FALSE(r.congested);
    CHECK(r.per_channel.at(ch1).utilization == doctest::Approx(u).epsilon(1e-12));
    CHECK(r.avg_delay_ms == doctest::Approx(T / (1 - u) * 1e3).epsilon(1e-12));
}

TEST_CASE("doubling past saturation halves throughput")
{
    Topology t;
    t.add_node(make_ap({0, 0}, ch1));
    t.add_node(make_sta(NodeId{101}, {2, 0}));
    t.associate(NodeId{101}, kApId);
    PerfParams pp;
    const double T = 260.6024930748e-6;
    const double saturating = 12000 / T;  // U = 1
    auto r = evaluate(t, TrafficProfile(2 * saturating, 1), {}, RadioEnvironment{}, pp);
    CHECK(r.per_channel.at(ch1).utilization == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.network_throughput_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(r.congested);
    CHECK(r.avg_delay_ms == pp.delay_cap_ms);
}

TEST_CASE("busy fraction clamps at one")
{
    Topology t;
    t.add_node(make_ap({0, 0}, ch1));
    t.add_node(make_sta(NodeId{101}, {2, 0}));
    t.associate(NodeId{101}, kApId);
    LinkBudget links(t, RadioEnvironment{});
    PerfParams pp;
    const double T = 260.6024930748e-6;
    CHECK(busy_fraction(t, links, TrafficProfile(0.4 * 12000 / T, 1), {}, pp, ch1) == doctest::Approx(0.4));
    CHECK(busy_fraction(t, links, TrafficProfile(1.7 * 12000 / T, 1), {}, pp, ch1) == 1.0);
    CHECK(busy_fraction(t, links, TrafficProfile(1e6, 1), {}, pp, ch6) == 0.0);
}

TEST_CASE("property: random instances against the brute-force oracle")
{
    Rng rng(0x5eed'0f'0ac1eULL);
    PerfParams pp;
    RadioEnvironment env;
    int uncongested = 0;
    for (int n = 0; n < 1000; ++n) {
        Instance in = random_instance(rng);
        LinkBudget links(in.t, env, in.rssi);
        PerfReport r = evaluate(in.t, links, in.traffic, in.external, pp);
        Oracle o = brute_force(in, links, pp);

        for (const auto& [c, state] : r.per_channel) {
            REQUIRE(state.flows.size() <= 4);
            CHECK(state.utilization == doctest::Approx(o.u.at(c)).epsilon(1e-12));
            CHECK(state.busy_fraction >= 0.0);
            CHECK(state.busy_fraction <= 1.0);
        }
        for (const auto& [sta, s] : r.per_sta) {
            CHECK(std::abs(s.delivered_bps - o.delivered.at(sta)) <= 1e-9 * s.offered_bps);
            CHECK(s.delay_ms == doctest::Approx(o.delay_ms.at(sta)).epsilon(1e-12));
        }

        if (!r.congested) {
            ++uncongested;
            for (const auto& [sta, s] : r.per_sta) CHECK(s.delivered_bps == s.offered_bps);
            CHECK(r.network_throughput_pct == 100.0);
        }

        // busy fraction never decreases as every load grows
        double prev = -1.0;
        for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            TrafficProfile tp(in.traffic.per_sta_load_bps() * scale, in.traffic.n_sta());
            auto ext = in.external;
            for (auto& e : ext) e.load_bps *= scale;
            double c = busy_fraction(in.t, links, tp, ext, pp, ch1);
            CHECK(c >= prev);
            CHECK(c <= 1.0);
            prev = c;
        }

        // the assignment-level model reports the same network figures
        LoadModel model(in.t, links, in.traffic, in.external, pp);
        PerfSummary s = model.summarize(model.assignment(in.t));
        CHECK(s.congested == r.congested);
        CHECK(s.network_throughput_pct == doctest::Approx(r.network_throughput_pct).epsilon(1e-12));
        CHECK(s.avg_delay_ms == doctest::Approx(r.avg_delay_ms).epsilon(1e-12));
    }
    CHECK(uncongested > 100);
}

TEST_CASE("associating below sensitivity is a logic error")
{
    Topology t;
    t.add_node(make_ap({0, 0}, ch1));
    t.add_node(make_sta(NodeId{101}, {500, 0}));
    t.associate(NodeId{101}, kApId);
    CHECK_THROWS_AS(build_flows(t, TrafficProfile(1e6, 1), {}, RadioEnvironment{}), std::logic_error);
}
