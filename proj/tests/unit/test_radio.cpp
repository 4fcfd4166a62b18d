#include "homewifi/radio.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace homewifi;

// Reference values come from tests/oracles/path_loss.py.
namespace oracle {
constexpr double d_max_2g4_m = 186.5655517979;
constexpr double d_5g_minus70_m = 26.3038519852;
constexpr double pl_2g4_10m_db = 70.6042248342;
constexpr double pl_5g_half_m_db = 45.9794000867;
constexpr double rssi_2g4_20m_dbm = -59.9361546998;
}  // namespace oracle

namespace {

RadioConfig tx2g4()
{
    return RadioConfig{Band::Band2G4, {Band::Band2G4, 1}, 20.0, -90.0, 2};
}

RadioConfig tx5g()
{
    return RadioConfig{Band::Band5G, kBackhaulChannel, 20.0, -90.0, 2};
}

}  // namespace

TEST_CASE("path loss at reference distances")
{
    CHECK(path_loss_db(2400, 10) == doctest::Approx(oracle::pl_2g4_10m_db).epsilon(1e-12));
    CHECK(path_loss_db(2400, 1) == doctest::Approx(39.6042248342).epsilon(1e-12));
    // below the clamp distance the loss stays at its 1 m value
    CHECK(path_loss_db(5000, 0.5) == doctest::Approx(oracle::pl_5g_half_m_db).epsilon(1e-12));

    PropagationParams floor7;
    floor7.floor_penetration_db = 7.0;
    CHECK(path_loss_db(2400, 33, floor7) - path_loss_db(2400, 33) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("received power")
{
    CHECK(rssi_dbm(tx2g4(), {0, 0}, {10, 0}) == doctest::Approx(-50.6042248342).epsilon(1e-12));
    CHECK(rssi_dbm(tx2g4(), {0, 0}, {100, 0}) == doctest::Approx(-81.6042248342).epsilon(1e-12));
    CHECK(rssi_dbm(tx2g4(), {0, 0}, {12, 16}) == doctest::Approx(oracle::rssi_2g4_20m_dbm).epsilon(1e-12));
}

TEST_CASE("range inversion")
{
    CHECK(max_range_m(tx2g4(), -90) == doctest::Approx(oracle::d_max_2g4_m).epsilon(1e-10));
    CHECK(max_range_m(tx5g(), -70) == doctest::Approx(oracle::d_5g_minus70_m).epsilon(1e-10));
    for (double thr : {-90.0, -77.5, -61.0, -40.0}) {
        double d = max_range_m(tx5g(), thr);
        CHECK(rssi_dbm(tx5g(), {0, 0}, {d, 0}) == doctest::Approx(thr).epsilon(1e-12));
    }
}

TEST_CASE("MCS lookup")
{
    const auto t5 = default_mcs_table_5g();
    const auto t24 = default_mcs_table_2g4();
    CHECK_NOTHROW(validate(t5));
    CHECK_NOTHROW(validate(t24));

    auto at77 = mcs_for_rssi(t5, -77, 2);
    REQUIRE(at77);
    CHECK(at77->mcs == 1);

    auto top = mcs_for_rssi(t24, 20, 2);
    REQUIRE(top);
    CHECK(top->mcs == t24.entries.back().mcs);
    CHECK(top->phy_rate_bps == doctest::Approx(144.4e6));

    CHECK_FALSE(mcs_for_rssi(t24, -85, 2));
    // between the sensitivity and the first threshold the link still runs at MCS 0
    CHECK(link_phy_rate_bps(t24, -85, 2) == t24.entries.front().rate_bps(2));

    CHECK(t24.entries.front().rate_bps(1) * 3 == doctest::Approx(t24.entries.front().rate_bps(3)));
}

TEST_CASE("MCS tables must increase")
{
    auto t = default_mcs_table_2g4();
    std::swap(t.entries[2], t.entries[3]);
    CHECK_THROWS_AS(validate(t), std::invalid_argument);
}

TEST_CASE("link budget is reciprocal and honours overrides")
{
    Topology t;
    t.add_node(make_ap({0, 0}, {Band::Band2G4, 1}));
    t.add_node(make_extender(NodeId{1}, {26.3, 0}, {Band::Band2G4, 6}));
    t.set_backhaul_parent(NodeId{1}, kApId);
    t.add_node(make_sta(NodeId{101}, {10, 0}));
    t.add_node(make_sta(NodeId{102}, {300, 0}));

    RadioEnvironment env;
    LinkBudget links(t, env);
    CHECK(links.access_rssi(NodeId{101}, kApId) == doctest::Approx(-50.6042248342).epsilon(1e-12));
    CHECK(links.in_range(NodeId{101}, kApId));
    CHECK_FALSE(links.in_range(NodeId{102}, kApId));
    CHECK(links.in_range_targets(NodeId{102}).empty());
    CHECK(links.backhaul_rssi(NodeId{1}) == doctest::Approx(-69.9980282899).epsilon(1e-10));

    RssiOverrides pinned{{{NodeId{101}, kApId}, -43.0}, {{NodeId{1}, NodeId{101}}, -66.0}};
    LinkBudget fixed(t, env, pinned);
    CHECK(fixed.access_rssi(NodeId{101}, kApId) == -43.0);
    CHECK(fixed.access_rssi(NodeId{101}, NodeId{1}) == -66.0);
    auto targets = fixed.in_range_targets(NodeId{101});
    REQUIRE(targets.size() == 2);
    CHECK(targets[0] == kApId);
}
