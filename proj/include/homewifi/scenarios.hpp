#pragma once

#include "homewifi/model.hpp"
#include "homewifi/radio.hpp"
#include "homewifi/selection.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace homewifi {

enum class TopologyKind { Circle0E, Circle2E, Circle4E, Home0E, Home1E, Home2E, Fixture };
enum class DeploymentArea { CircleDmax, Circle1p2Dmax, HomeRect };
enum class Sampling { UniformRadius, UniformArea };
enum class ChannelPlan { Multi, Single };

std::string to_string(TopologyKind k);
std::string to_string(DeploymentArea a);
std::string to_string(Sampling s);
std::string to_string(ChannelPlan p);
TopologyKind parse_topology_kind(const std::string& s);
DeploymentArea parse_deployment_area(const std::string& s);
Sampling parse_sampling(const std::string& s);
ChannelPlan parse_channel_plan(const std::string& s);

int extender_count(TopologyKind k);

/// STA ids start above every AP/Extender id so CSV columns line up across topologies.
inline constexpr std::uint32_t kStaIdBase = 100;
constexpr NodeId sta_id(std::uint32_t ordinal) { return NodeId{kStaIdBase + ordinal}; }

struct HomeGeometry {
    double width_m = 58.6;
    double height_m = 10.0;
    Position ap{3.0, 5.0};
};

struct ScenarioSpec {
    std::string name;
    TopologyKind topology_kind = TopologyKind::Circle0E;
    std::size_t n_sta = 10;
    int n_extenders = 0;
    /// 5 GHz RSSI between each Extender and its backhaul parent.
    double extender_rssi_dbm = -70.0;
    DeploymentArea deployment_area = DeploymentArea::CircleDmax;
    ChannelPlan channel_plan = ChannelPlan::Multi;
    /// Access channel per AP/Extender; filled from channel_plan when empty.
    std::map<NodeId, ChannelId> access_channels;
    std::size_t k = 1000;
    std::uint64_t seed = 1;
    Sampling sampling = Sampling::UniformRadius;
    HomeGeometry home{};
    /// When set, every deployment uses these STA positions.
    std::optional<std::vector<Position>> fixed_sta_positions;
};

/// Throws std::invalid_argument on inconsistent fields.
void validate(const ScenarioSpec& spec);

/// Access channels of AP (id 0) and Extenders 1..n_ext under a plan.
std::map<NodeId, ChannelId> plan_channels(TopologyKind kind, ChannelPlan plan);

/// AP at the origin plus 0, 2 (opposite pair on x) or 4 (cross) Extenders at the
/// distance where the AP's 5 GHz signal equals `rssi_ap_e`.
Topology gen_circle(int n_ext, double rssi_ap_e, ChannelPlan plan = ChannelPlan::Multi,
                    const RadioEnvironment& env = {});

/// Rectangle with the AP near one end; E1 at `extender_rssi_dbm` from the AP and
/// E2 chained off E1 at the same RSSI toward the far end.
Topology gen_home(int n_ext, ChannelPlan plan = ChannelPlan::Multi, const HomeGeometry& home = {},
                  double extender_rssi_dbm = -70.0, const RadioEnvironment& env = {});

/// AP/Extender skeleton for a spec (no STAs).
Topology build_topology(const ScenarioSpec& spec, const RadioEnvironment& env = {});

/// Radius of the AP's 2.4 GHz coverage.
double coverage_radius_m(const RadioEnvironment& env = {});

std::vector<Position> sample_deployment(const ScenarioSpec& spec, std::size_t deployment_index,
                                        const RadioEnvironment& env = {});

/// Adds STAs sta_id(1..n) at `positions`. `capable` marks 802.11k/v support.
Topology add_stas(Topology t, const std::vector<Position>& positions, const std::set<NodeId>& capable);

// ---------------------------------------------------------------------------
// Test grids
// ---------------------------------------------------------------------------

struct SweepPoint {
    std::string test_id;
    std::size_t index = 0;
    ScenarioSpec scenario;
    SelectionConfig selection;
    TrafficProfile traffic{0.0, 10};
    ExternalLoad external{};
    /// Extender RSSI is a swept parameter (Test 1.1).
    bool sweeps_rssi = false;
};

std::vector<std::string> known_tests();

/// Full parameter grid of a test. Throws std::invalid_argument for unknown ids.
std::vector<SweepPoint> build_test(const std::string& test_id);

/// Ten STAs from a named seed, six of them on the Extender's side of the house.
std::vector<Position> interference_fixture_positions(const HomeGeometry& home = {},
                                                     double extender_rssi_dbm = -70.0,
                                                     const RadioEnvironment& env = {});

// ---------------------------------------------------------------------------
// Measured-RSSI testbed fixture
// ---------------------------------------------------------------------------

struct FixtureCase {
    std::string name;
    bool with_extender = true;
    std::vector<NodeId> stas;
    Mechanism mechanism = Mechanism::RssiBased;
    /// Total offered load; RSSI-based cases are load independent.
    double b_t_bps = 0.0;
    std::map<NodeId, NodeId> expected;
};

struct Fixture {
    /// (STA, target) -> dBm.
    std::map<std::pair<NodeId, NodeId>, double> rssi_matrix;
    double backhaul_rssi_dbm = -70.0;
    NodeId extender{1};
    std::vector<FixtureCase> cases;

    Topology topology(const FixtureCase& c) const;
    RssiOverrides overrides() const;
};

Fixture table6_fixture();

}  // namespace homewifi
