#include "homewifi/scenarios.hpp"

#include "homewifi/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homewifi {

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& values, const char* what)
{
    for (E v : values)
        if (to_string(v) == s) return v;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

constexpr std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

ChannelId ch24(int n)
{
    return ChannelId{Band::Band2G4, n};
}

}  // namespace

std::string to_string(TopologyKind k)
{
    switch (k) {
    case TopologyKind::Circle0E: return "circle-0e";
    case TopologyKind::Circle2E: return "circle-2e";
    case TopologyKind::Circle4E: return "circle-4e";
    case TopologyKind::Home0E: return "home-0e";
    case TopologyKind::Home1E: return "home-1e";
    case TopologyKind::Home2E: return "home-2e";
    case TopologyKind::Fixture: return "fixture";
    }
    return "?";
}

std::string to_string(DeploymentArea a)
{
    switch (a) {
    case DeploymentArea::CircleDmax: return "circle-dmax";
    case DeploymentArea::Circle1p2Dmax: return "circle-1.2dmax";
    case DeploymentArea::HomeRect: return "home-rect";
    }
    return "?";
}

std::string to_string(Sampling s)
{
    return s == Sampling::UniformRadius ? "uniform-radius" : "uniform-area";
}

std::string to_string(ChannelPlan p)
{
    return p == ChannelPlan::Multi ? "multi" : "single";
}

TopologyKind parse_topology_kind(const std::string& s)
{
    return parse_enum(s,
                      std::array{TopologyKind::Circle0E, TopologyKind::Circle2E, TopologyKind::Circle4E,
                                 TopologyKind::Home0E, TopologyKind::Home1E, TopologyKind::Home2E,
                                 TopologyKind::Fixture},
                      "topology kind");
}

DeploymentArea parse_deployment_area(const std::string& s)
{
    return parse_enum(
        s, std::array{DeploymentArea::CircleDmax, DeploymentArea::Circle1p2Dmax, DeploymentArea::HomeRect},
        "deployment area");
}

Sampling parse_sampling(const std::string& s)
{
    return parse_enum(s, std::array{Sampling::UniformRadius, Sampling::UniformArea}, "sampling");
}

ChannelPlan parse_channel_plan(const std::string& s)
{
    return parse_enum(s, std::array{ChannelPlan::Multi, ChannelPlan::Single}, "channel plan");
}

int extender_count(TopologyKind k)
{
    switch (k) {
    case TopologyKind::Circle0E:
    case TopologyKind::Home0E:
    case TopologyKind::Fixture: return 0;
    case TopologyKind::Circle2E:
    case TopologyKind::Home2E: return 2;
    case TopologyKind::Circle4E: return 4;
    case TopologyKind::Home1E: return 1;
    }
    return 0;
}

namespace {

bool is_circle(TopologyKind k)
{
    return k == TopologyKind::Circle0E || k == TopologyKind::Circle2E || k == TopologyKind::Circle4E;
}

}  // namespace

void validate(const ScenarioSpec& spec)
{
    if (spec.topology_kind != TopologyKind::Fixture && spec.n_extenders != extender_count(spec.topology_kind))
        throw std::invalid_argument("scenario '" + spec.name + "': n_extenders does not match " +
                                    to_string(spec.topology_kind));
    if (spec.k < 1) throw std::invalid_argument("scenario '" + spec.name + "': k must be at least 1");
    if (spec.n_sta < 1) throw std::invalid_argument("scenario '" + spec.name + "': at least one STA is required");
    if (is_circle(spec.topology_kind) == (spec.deployment_area == DeploymentArea::HomeRect))
        throw std::invalid_argument("scenario '" + spec.name + "': deployment area does not fit the topology");
    if (spec.fixed_sta_positions && spec.fixed_sta_positions->size() != spec.n_sta)
        throw std::invalid_argument("scenario '" + spec.name + "': fixed positions do not match n_sta");
    if (!(spec.home.width_m > 0.0 && spec.home.height_m > 0.0))
        throw std::invalid_argument("scenario '" + spec.name + "': home rectangle must have positive size");
    for (const auto& [id, c] : spec.access_channels) {
        if (id.value > static_cast<std::uint32_t>(spec.n_extenders))
            throw std::invalid_argument("scenario '" + spec.name + "': channel given for unknown node " +
                                        std::to_string(id.value));
        if (c.band != Band::Band2G4)
            throw std::invalid_argument("scenario '" + spec.name + "': access channels must be 2.4 GHz");
    }
}

std::map<NodeId, ChannelId> plan_channels(TopologyKind kind, ChannelPlan plan)
{
    std::map<NodeId, ChannelId> out{{kApId, ch24(1)}};
    const int n = extender_count(kind);
    static constexpr int circle[] = {6, 6, 11, 11};
    static constexpr int home[] = {6, 11};
    for (int i = 0; i < n; ++i) {
        int c = plan == ChannelPlan::Single ? 1 : (is_circle(kind) ? circle[i] : home[i]);
        out[NodeId{static_cast<std::uint32_t>(i + 1)}] = ch24(c);
    }
    return out;
}

namespace {

double extender_spacing(double rssi, const RadioEnvironment& env)
{
    const Node ap = make_ap({}, ch24(1));
    const RadioConfig& tx = ap.backhaul_radio();
    if (rssi < tx.sensitivity_dbm || rssi > tx.tx_power_dbm)
        throw std::invalid_argument("extender RSSI " + std::to_string(rssi) + " dBm is outside [" +
                                    std::to_string(tx.sensitivity_dbm) + ", " + std::to_string(tx.tx_power_dbm) +
                                    "] dBm");
    return max_range_m(tx, rssi, env.propagation);
}

}  // namespace

Topology gen_circle(int n_ext, double rssi_ap_e, ChannelPlan plan, const RadioEnvironment& env)
{
    TopologyKind kind;
    switch (n_ext) {
    case 0: kind = TopologyKind::Circle0E; break;
    case 2: kind = TopologyKind::Circle2E; break;
    case 4: kind = TopologyKind::Circle4E; break;
    default: throw std::invalid_argument("gen_circle: n_ext must be 0, 2 or 4");
    }
    auto channels = plan_channels(kind, plan);
    Topology t;
    t.add_node(make_ap({0.0, 0.0}, channels.at(kApId)));
    if (n_ext == 0) return t;

    const double d = extender_spacing(rssi_ap_e, env);
    const Position spots[] = {{d, 0.0}, {-d, 0.0}, {0.0, d}, {0.0, -d}};
    for (int i = 0; i < n_ext; ++i) {
        NodeId id{static_cast<std::uint32_t>(i + 1)};
        t.add_node(make_extender(id, spots[i], channels.at(id)));
        t.set_backhaul_parent(id, kApId);
    }
    return t;
}

Topology gen_home(int n_ext, ChannelPlan plan, const HomeGeometry& home, double extender_rssi_dbm,
                  const RadioEnvironment& env)
{
    TopologyKind kind;
    switch (n_ext) {
    case 0: kind = TopologyKind::Home0E; break;
    case 1: kind = TopologyKind::Home1E; break;
    case 2: kind = TopologyKind::Home2E; break;
    default: throw std::invalid_argument("gen_home: n_ext must be 0, 1 or 2");
    }
    auto channels = plan_channels(kind, plan);
    Topology t;
    t.add_node(make_ap(home.ap, channels.at(kApId)));
    const double d = n_ext > 0 ? extender_spacing(extender_rssi_dbm, env) : 0.0;
    NodeId parent = kApId;
    Position at = home.ap;
    for (int i = 0; i < n_ext; ++i) {
        NodeId id{static_cast<std::uint32_t>(i + 1)};
        at.x += d;
        t.add_node(make_extender(id, at, channels.at(id)));
        t.set_backhaul_parent(id, parent);
        parent = id;
    }
    return t;
}

Topology build_topology(const ScenarioSpec& spec, const RadioEnvironment& env)
{
    validate(spec);
    Topology t;
    switch (spec.topology_kind) {
    case TopologyKind::Circle0E:
    case TopologyKind::Circle2E:
    case TopologyKind::Circle4E:
        t = gen_circle(spec.n_extenders, spec.extender_rssi_dbm, spec.channel_plan, env);
        break;
    case TopologyKind::Home0E:
    case TopologyKind::Home1E:
    case TopologyKind::Home2E:
        t = gen_home(spec.n_extenders, spec.channel_plan, spec.home, spec.extender_rssi_dbm, env);
        break;
    case TopologyKind::Fixture:
        throw std::invalid_argument("fixture scenarios are built from table6_fixture()");
    }
    for (const auto& [id, c] : spec.access_channels) {
        Node n = t.node(id);
        for (auto& r : n.radios)
            if (r.band == Band::Band2G4) r.channel = c;
        t.add_node(std::move(n));
    }
    return t;
}

double coverage_radius_m(const RadioEnvironment& env)
{
    const Node ap = make_ap({}, ch24(1));
    const Node sta = make_sta(sta_id(1), {});
    return max_range_m(ap.access_radio(), sta.access_radio().sensitivity_dbm, env.propagation);
}

std::vector<Position> sample_deployment(const ScenarioSpec& spec, std::size_t deployment_index,
                                        const RadioEnvironment& env)
{
    if (spec.fixed_sta_positions) return *spec.fixed_sta_positions;

    Rng rng(substream_seed(spec.seed, deployment_index));
    std::vector<Position> out;
    out.reserve(spec.n_sta);
    if (spec.deployment_area == DeploymentArea::HomeRect) {
        for (std::size_t i = 0; i < spec.n_sta; ++i) {
            double x = rng.uniform(0.0, spec.home.width_m);
            double y = rng.uniform(0.0, spec.home.height_m);
            out.push_back({x, y});
        }
        return out;
    }

    double radius = coverage_radius_m(env);
    if (spec.deployment_area == DeploymentArea::Circle1p2Dmax) radius *= 1.2;
    for (std::size_t i = 0; i < spec.n_sta; ++i) {
        double u = rng.uniform01();
        double r = radius * (spec.sampling == Sampling::UniformRadius ? u : std::sqrt(u));
        double theta = 2.0 * std::numbers::pi * rng.uniform01();
        out.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
    return out;
}

Topology add_stas(Topology t, const std::vector<Position>& positions, const std::set<NodeId>& capable)
{
    for (std::size_t i = 0; i < positions.size(); ++i) {
        NodeId id = sta_id(static_cast<std::uint32_t>(i + 1));
        t.add_node(make_sta(id, positions[i], capable.contains(id)));
    }
    return t;
}

// ---------------------------------------------------------------------------

std::vector<std::string> known_tests()
{
    return {"1.1", "1.2", "1.3", "2.1", "2.2", "2.3", "2.4"};
}

namespace {

struct Builder {
    std::string test_id;
    std::vector<SweepPoint> points;

    static TopologyKind circle_kind(int n)
    {
        return n == 0 ? TopologyKind::Circle0E : n == 2 ? TopologyKind::Circle2E : TopologyKind::Circle4E;
    }
    static TopologyKind home_kind(int n)
    {
        return n == 0 ? TopologyKind::Home0E : n == 1 ? TopologyKind::Home1E : TopologyKind::Home2E;
    }

    void add(TopologyKind kind, ChannelPlan plan, Mechanism m, double per_sta_bps, std::size_t k,
             DeploymentArea area, double alpha = 0.5, double beta = 100.0, double rssi = -70.0,
             ExternalLoad ext = {}, bool sweeps_rssi = false)
    {
        SweepPoint p;
        p.test_id = test_id;
        p.index = points.size();
        p.scenario.topology_kind = kind;
        p.scenario.n_extenders = extender_count(kind);
        p.scenario.channel_plan = plan;
        p.scenario.name = to_string(kind) + "-" + to_string(plan);
        p.scenario.extender_rssi_dbm = rssi;
        p.scenario.deployment_area = area;
        p.scenario.k = k;
        p.selection.mechanism = m;
        p.selection.alpha = alpha;
        p.selection.beta_pct = beta;
        p.traffic = TrafficProfile(per_sta_bps, p.scenario.n_sta);
        p.external = ext;
        p.sweeps_rssi = sweeps_rssi;
        points.push_back(std::move(p));
    }
};

constexpr Mechanism kRssi = Mechanism::RssiBased;
constexpr Mechanism kLoad = Mechanism::LoadAware;
constexpr ChannelPlan kMulti = ChannelPlan::Multi;
constexpr ChannelPlan kSingle = ChannelPlan::Single;
constexpr double kStep = 12e3;  // B_STA grid step, 0.012 Mbps

}  // namespace

std::vector<Position> interference_fixture_positions(const HomeGeometry& home, double extender_rssi_dbm,
                                                     const RadioEnvironment& env)
{
    Rng rng(fnv1a("home-interference-fixture"));
    const double e1_x = home.ap.x + extender_spacing(extender_rssi_dbm, env);
    const double mid = 0.5 * (home.ap.x + e1_x);
    const double far = std::min(home.width_m, e1_x + 8.0);
    std::vector<Position> out;
    for (int i = 0; i < 10; ++i) {
        bool extender_side = i % 5 != 0 && i % 5 != 2;
        double x = extender_side ? rng.uniform(mid, far) : rng.uniform(0.0, mid);
        double y = rng.uniform(0.0, home.height_m);
        out.push_back({x, y});
    }
    return out;
}

std::vector<SweepPoint> build_test(const std::string& test_id)
{
    Builder b{test_id, {}};
    const auto circ = DeploymentArea::CircleDmax;
    const auto home = DeploymentArea::HomeRect;

    if (test_id == "1.1") {
        b.add(TopologyKind::Circle0E, kMulti, kRssi, 2.4e6, 1000, circ);
        for (int r = -50; r >= -90; --r)
            for (ChannelPlan plan : {kMulti, kSingle})
                for (Mechanism m : {kRssi, kLoad})
                    b.add(TopologyKind::Circle4E, plan, m, 2.4e6, 1000, circ, 0.5, 100.0, r, {}, true);
    } else if (test_id == "1.2") {
        const auto wide = DeploymentArea::Circle1p2Dmax;
        for (int n : {0, 2, 4}) b.add(Builder::circle_kind(n), kMulti, kRssi, 2.4e6, 10000, wide);
        for (int n : {2, 4}) b.add(Builder::circle_kind(n), kMulti, kLoad, 2.4e6, 10000, wide);
    } else if (test_id == "1.3") {
        for (int i = 1; i <= 300; ++i) {
            for (int n : {0, 2, 4}) b.add(Builder::circle_kind(n), kMulti, kRssi, i * kStep, 1000, circ);
            for (int n : {2, 4}) b.add(Builder::circle_kind(n), kMulti, kLoad, i * kStep, 1000, circ);
        }
    } else if (test_id == "2.1") {
        for (int i = 1; i <= 500; ++i) {
            b.add(TopologyKind::Home0E, kMulti, kRssi, i * kStep, 1000, home);
            for (ChannelPlan plan : {kMulti, kSingle})
                for (Mechanism m : {kRssi, kLoad})
                    for (int n : {1, 2}) b.add(Builder::home_kind(n), plan, m, i * kStep, 1000, home);
        }
    } else if (test_id == "2.2") {
        for (double bsta : {1.8e6, 3.0e6, 4.2e6, 5.4e6})
            for (ChannelPlan plan : {kMulti, kSingle})
                for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0})
                    b.add(TopologyKind::Home2E, plan, kLoad, bsta, 1000, home, alpha);
    } else if (test_id == "2.3") {
        for (double bsta : {1.8e6, 3.0e6, 4.2e6, 5.4e6})
            for (ChannelPlan plan : {kMulti, kSingle})
                for (double beta : {0.0, 25.0, 50.0, 75.0, 100.0})
                    b.add(TopologyKind::Home2E, plan, kLoad, bsta, 1000, home, 0.5, beta);
    } else if (test_id == "2.4") {
        const auto fixed = interference_fixture_positions();
        for (int i = 0; i <= 48; ++i) {
            ExternalLoad ext{ChannelId{Band::Band2G4, 6}, i * 0.25e6};
            b.add(TopologyKind::Home0E, kMulti, kRssi, 4.32e6, 1, home, 0.5, 100.0, -70.0, ext);
            b.add(TopologyKind::Home1E, kMulti, kRssi, 4.32e6, 1, home, 0.5, 100.0, -70.0, ext);
            for (double alpha : {0.5, 0.75, 1.0})
                b.add(TopologyKind::Home1E, kMulti, kLoad, 4.32e6, 1, home, alpha, 100.0, -70.0, ext);
        }
        for (auto& p : b.points) p.scenario.fixed_sta_positions = fixed;
    } else {
        throw std::invalid_argument("unknown test '" + test_id + "' (known: 1.1 1.2 1.3 2.1 2.2 2.3 2.4)");
    }
    return std::move(b.points);
}

// ---------------------------------------------------------------------------

Topology Fixture::topology(const FixtureCase& c) const
{
    Topology t;
    t.add_node(make_ap({0.0, 0.0}, ch24(1)));
    if (c.with_extender) {
        t.add_node(make_extender(extender, {10.0, 0.0}, ch24(6)));
        t.set_backhaul_parent(extender, kApId);
    }
    for (NodeId s : c.stas) t.add_node(make_sta(s, {5.0, 5.0}, true));
    return t;
}

RssiOverrides Fixture::overrides() const
{
    RssiOverrides out;
    for (const auto& [key, dbm] : rssi_matrix) out[{key.second, key.first}] = dbm;
    out[{kApId, extender}] = backhaul_rssi_dbm;
    return out;
}

Fixture table6_fixture()
{
    Fixture f;
    const NodeId ap = kApId;
    const NodeId e = f.extender;
    const std::pair<double, double> rows[] = {{-43, -66}, {-31, -69}, {-38, -67}, {-59, -41},
                                              {-65, -35}, {-41, -51}, {-46, -52}};
    for (std::uint32_t i = 0; i < 7; ++i) {
        f.rssi_matrix[{sta_id(i + 1), ap}] = rows[i].first;
        f.rssi_matrix[{sta_id(i + 1), e}] = rows[i].second;
    }

    auto s = [](std::uint32_t n) { return sta_id(n); };
    const std::vector<NodeId> bed1{s(1), s(2), s(3), s(4), s(5)};
    const std::vector<NodeId> bed2{s(1), s(2), s(3), s(6), s(7)};
    auto all = [&](const std::vector<NodeId>& stas, NodeId to) {
        std::map<NodeId, NodeId> m;
        for (NodeId x : stas) m[x] = to;
        return m;
    };

    f.cases.push_back({"testbed1-only-ap", false, bed1, kRssi, 0.0, all(bed1, ap)});
    f.cases.push_back({"testbed1-ap-extender", true, bed1, kRssi, 0.0,
                       {{s(1), ap}, {s(2), ap}, {s(3), ap}, {s(4), e}, {s(5), e}}});
    f.cases.push_back({"testbed2-rssi", true, bed2, kRssi, 0.0, all(bed2, ap)});

    const std::pair<double, std::map<NodeId, NodeId>> load_aware[] = {
        {5e6, {{s(1), ap}, {s(2), ap}, {s(3), ap}, {s(6), ap}, {s(7), e}}},
        {37.5e6, {{s(1), ap}, {s(2), ap}, {s(3), e}, {s(6), ap}, {s(7), e}}},
        {50e6, {{s(1), ap}, {s(2), ap}, {s(3), e}, {s(6), ap}, {s(7), e}}},
        {75e6, {{s(1), ap}, {s(2), ap}, {s(3), e}, {s(6), ap}, {s(7), e}}},
        {100e6, {{s(1), ap}, {s(2), e}, {s(3), ap}, {s(6), ap}, {s(7), ap}}},
    };
    for (const auto& [bt, expected] : load_aware) {
        std::string name = "testbed2-loadaware-" + std::to_string(bt / 1e6);
        name.erase(name.find_last_not_of('0') + 1);
        if (name.back() == '.') name.pop_back();
        f.cases.push_back({name, true, bed2, kLoad, bt, expected});
    }
    return f;
}

}  // namespace homewifi
