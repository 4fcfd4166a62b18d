#include "homewifi/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace homewifi {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

/// Reads keys from one JSON object and rejects any it was not asked about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
    }
    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions()) return;
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) throw std::invalid_argument(path_ + ": unknown key '" + k + "'");
    }

    template <class T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(path_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string path(const char* key) const { return path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_propagation(const json& j, PropagationParams& p)
{
    Section s(j, "propagation");
    s.get("distance_power_loss_coeff", p.distance_power_loss_coeff);
    s.get("floor_penetration_db", p.floor_penetration_db);
    s.get("constant_offset_db", p.constant_offset_db);
    s.get("min_distance_m", p.min_distance_m);
    if (const json* f = s.child("frequency_mhz")) {
        Section fs(*f, s.path("frequency_mhz"));
        fs.get("2.4GHz", p.band_frequency_mhz[0]);
        fs.get("5GHz", p.band_frequency_mhz[1]);
    }
    validate(p);
}

void read_mcs_table(const json& j, McsTable& t, const std::string& path)
{
    Section s(j, path);
    s.get("channel_width_mhz", t.channel_width_mhz);
    if (const json* e = s.child("entries")) {
        if (!e->is_array()) throw std::invalid_argument(path + ".entries: expected an array");
        t.entries.clear();
        for (std::size_t i = 0; i < e->size(); ++i) {
            Section es((*e)[i], path + ".entries[" + std::to_string(i) + "]");
            McsEntry m;
            es.get("mcs", m.mcs);
            es.get("min_rssi_dbm", m.min_rssi_dbm);
            es.get("rate_bps_1ss", m.rate_bps_1ss);
            es.get("rate_bps_2ss", m.rate_bps_2ss);
            t.entries.push_back(m);
        }
    }
    validate(t);
}

void read_mac(const json& j, MacOverheads& o, const std::string& path)
{
    Section s(j, path);
    s.get("difs_us", o.difs_us);
    s.get("sifs_us", o.sifs_us);
    s.get("slot_us", o.slot_us);
    s.get("avg_backoff_slots", o.avg_backoff_slots);
    s.get("ack_us", o.ack_us);
    s.get("phy_preamble_us", o.phy_preamble_us);
    validate(o);
}

ScenarioSpec read_scenario(const json& j)
{
    Section s(j, "scenario");
    ScenarioSpec spec;
    std::string kind = to_string(spec.topology_kind);
    std::string area;
    std::string plan = to_string(spec.channel_plan);
    std::string sampling = to_string(spec.sampling);
    s.get("name", spec.name);
    s.get("topology_kind", kind);
    spec.topology_kind = parse_topology_kind(kind);
    spec.n_extenders = extender_count(spec.topology_kind);
    spec.deployment_area = (kind.rfind("home", 0) == 0) ? DeploymentArea::HomeRect : DeploymentArea::CircleDmax;
    s.get("n_sta", spec.n_sta);
    s.get("n_extenders", spec.n_extenders);
    s.get("extender_rssi_dbm", spec.extender_rssi_dbm);
    s.get("deployment_area", area);
    if (!area.empty()) spec.deployment_area = parse_deployment_area(area);
    s.get("channel_plan", plan);
    spec.channel_plan = parse_channel_plan(plan);
    s.get("k", spec.k);
    s.get("seed", spec.seed);
    s.get("sampling", sampling);
    spec.sampling = parse_sampling(sampling);
    if (const json* c = s.child("access_channels")) {
        Section cs(*c, s.path("access_channels"));
        for (const auto& [k, v] : c->items()) {
            int n = 0;
            cs.get(k.c_str(), n);
            spec.access_channels[NodeId{static_cast<std::uint32_t>(std::stoul(k))}] = ChannelId{Band::Band2G4, n};
        }
    }
    if (const json* h = s.child("home")) {
        Section hs(*h, s.path("home"));
        hs.get("width_m", spec.home.width_m);
        hs.get("height_m", spec.home.height_m);
        std::array<double, 2> ap{spec.home.ap.x, spec.home.ap.y};
        hs.get("ap", ap);
        spec.home.ap = {ap[0], ap[1]};
    }
    if (const json* f = s.child("fixed_sta_positions")) {
        std::vector<std::array<double, 2>> xy;
        try {
            xy = f->get<std::vector<std::array<double, 2>>>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("scenario.fixed_sta_positions: " + std::string(e.what()));
        }
        std::vector<Position> pos;
        for (const auto& p : xy) pos.push_back({p[0], p[1]});
        spec.fixed_sta_positions = pos;
    }
    if (spec.name.empty()) spec.name = kind + "-" + plan;
    validate(spec);
    return spec;
}

void read_selection(const json& j, SelectionConfig& c)
{
    Section s(j, "selection");
    std::string mech = to_string(c.mechanism);
    std::string tie = "ap-first";
    std::string self = "include";
    std::string refresh = "after-each-move";
    s.get("mechanism", mech);
    c.mechanism = parse_mechanism(mech);
    s.get("alpha", c.alpha);
    s.get("beta_pct", c.beta_pct);
    s.get("passes", c.passes);
    s.get("tie_break", tie);
    s.get("self_load", self);
    s.get("refresh", refresh);
    if (tie == "ap-first") c.tie_break = TieBreak::ApFirstThenLowestId;
    else if (tie == "lowest-id") c.tie_break = TieBreak::LowestId;
    else throw std::invalid_argument("selection.tie_break: expected ap-first|lowest-id");
    if (self == "include") c.self_load = SelfLoad::Include;
    else if (self == "exclude") c.self_load = SelfLoad::Exclude;
    else throw std::invalid_argument("selection.self_load: expected include|exclude");
    if (refresh == "after-each-move") c.refresh = LoadRefresh::AfterEachMove;
    else if (refresh == "frozen") c.refresh = LoadRefresh::FrozenSnapshot;
    else throw std::invalid_argument("selection.refresh: expected after-each-move|frozen");
    validate(c);
}

void read_traffic(const json& j, AppConfig& c)
{
    Section s(j, "traffic");
    s.get("per_sta_bps", c.per_sta_bps);
    s.get("packet_length_bits", c.packet_length_bits);
    if (const json* e = s.child("external")) {
        Section es(*e, s.path("external"));
        int ch = c.external.channel.number;
        es.get("channel", ch);
        c.external.channel = ChannelId{Band::Band2G4, ch};
        es.get("load_bps", c.external.load_bps);
        es.get("phy_rate_bps", c.external.phy_rate_bps);
        validate(c.external);
    }
    if (!(c.per_sta_bps >= 0.0)) throw std::invalid_argument("traffic.per_sta_bps must be non-negative");
    if (!(c.packet_length_bits > 0.0)) throw std::invalid_argument("traffic.packet_length_bits must be positive");
}

void read_run(const json& j, RunConfig& r)
{
    Section s(j, "run");
    std::string out = r.out_dir.string();
    std::size_t k = 0;
    s.get("test_id", r.test_id);
    s.get("seed", r.seed);
    s.get("workers", r.workers);
    s.get("out_dir", out);
    r.out_dir = out;
    s.get("export_csv", r.export_csv);
    s.get("export_json", r.export_json);
    s.get("emit_events", r.emit_events);
    s.get("k", k);
    if (s.child("k")) r.overrides.k = k;
}

ojson mcs_json(const McsTable& t)
{
    ojson entries = ojson::array();
    for (const auto& e : t.entries)
        entries.push_back({{"mcs", e.mcs},
                           {"min_rssi_dbm", e.min_rssi_dbm},
                           {"rate_bps_1ss", e.rate_bps_1ss},
                           {"rate_bps_2ss", e.rate_bps_2ss}});
    return {{"channel_width_mhz", t.channel_width_mhz}, {"entries", entries}};
}

ojson mac_json(const MacOverheads& o)
{
    return {{"difs_us", o.difs_us},     {"sifs_us", o.sifs_us}, {"slot_us", o.slot_us},
            {"avg_backoff_slots", o.avg_backoff_slots}, {"ack_us", o.ack_us}, {"phy_preamble_us", o.phy_preamble_us}};
}

}  // namespace

AppConfig parse_config(const json& j)
{
    AppConfig c;
    Section top(j, "config");
    if (const json* p = top.child("propagation")) read_propagation(*p, c.env.propagation);
    if (const json* m = top.child("mcs_tables")) {
        Section ms(*m, "mcs_tables");
        if (const json* t = ms.child("2.4GHz")) read_mcs_table(*t, c.env.mcs.band_2g4, "mcs_tables.2.4GHz");
        if (const json* t = ms.child("5GHz")) read_mcs_table(*t, c.env.mcs.band_5g, "mcs_tables.5GHz");
    }
    if (const json* m = top.child("mac_overheads")) {
        Section ms(*m, "mac_overheads");
        if (const json* t = ms.child("2.4GHz")) read_mac(*t, c.perf.mac_2g4, "mac_overheads.2.4GHz");
        if (const json* t = ms.child("5GHz")) read_mac(*t, c.perf.mac_5g, "mac_overheads.5GHz");
        ms.get("delay_cap_ms", c.perf.delay_cap_ms);
        if (!(c.perf.delay_cap_ms > 0.0)) throw std::invalid_argument("mac_overheads.delay_cap_ms must be positive");
    }
    if (const json* s = top.child("scenario")) c.scenario = read_scenario(*s);
    if (const json* s = top.child("selection")) read_selection(*s, c.selection);
    if (const json* t = top.child("traffic")) read_traffic(*t, c);
    if (const json* r = top.child("run")) read_run(*r, c.run);
    c.run.env = c.env;
    c.run.perf = c.perf;
    return c;
}

nlohmann::ordered_json to_json(const AppConfig& c)
{
    ojson j;
    const auto& p = c.env.propagation;
    j["propagation"] = {{"distance_power_loss_coeff", p.distance_power_loss_coeff},
                        {"floor_penetration_db", p.floor_penetration_db},
                        {"constant_offset_db", p.constant_offset_db},
                        {"min_distance_m", p.min_distance_m},
                        {"frequency_mhz", {{"2.4GHz", p.band_frequency_mhz[0]}, {"5GHz", p.band_frequency_mhz[1]}}}};
    j["mcs_tables"] = {{"2.4GHz", mcs_json(c.env.mcs.band_2g4)}, {"5GHz", mcs_json(c.env.mcs.band_5g)}};
    j["mac_overheads"] = {{"2.4GHz", mac_json(c.perf.mac_2g4)},
                          {"5GHz", mac_json(c.perf.mac_5g)},
                          {"delay_cap_ms", c.perf.delay_cap_ms}};
    if (c.scenario) {
        const ScenarioSpec& s = *c.scenario;
        ojson sc;
        sc["name"] = s.name;
        sc["topology_kind"] = to_string(s.topology_kind);
        sc["n_sta"] = s.n_sta;
        sc["n_extenders"] = s.n_extenders;
        sc["extender_rssi_dbm"] = s.extender_rssi_dbm;
        sc["deployment_area"] = to_string(s.deployment_area);
        sc["channel_plan"] = to_string(s.channel_plan);
        if (!s.access_channels.empty()) {
            ojson ac = ojson::object();
            for (const auto& [id, ch] : s.access_channels) ac[std::to_string(id.value)] = ch.number;
            sc["access_channels"] = ac;
        }
        sc["k"] = s.k;
        sc["seed"] = s.seed;
        sc["sampling"] = to_string(s.sampling);
        sc["home"] = {{"width_m", s.home.width_m}, {"height_m", s.home.height_m}, {"ap", {s.home.ap.x, s.home.ap.y}}};
        if (s.fixed_sta_positions) {
            ojson pos = ojson::array();
            for (const auto& q : *s.fixed_sta_positions) pos.push_back({q.x, q.y});
            sc["fixed_sta_positions"] = pos;
        }
        j["scenario"] = sc;
    }
    const auto& sel = c.selection;
    j["selection"] = {{"mechanism", to_string(sel.mechanism)},
                      {"alpha", sel.alpha},
                      {"beta_pct", sel.beta_pct},
                      {"passes", sel.passes},
                      {"tie_break", sel.tie_break == TieBreak::ApFirstThenLowestId ? "ap-first" : "lowest-id"},
                      {"self_load", sel.self_load == SelfLoad::Include ? "include" : "exclude"},
                      {"refresh", sel.refresh == LoadRefresh::AfterEachMove ? "after-each-move" : "frozen"}};
    j["traffic"] = {{"per_sta_bps", c.per_sta_bps},
                    {"packet_length_bits", c.packet_length_bits},
                    {"external",
                     {{"channel", c.external.channel.number},
                      {"load_bps", c.external.load_bps},
                      {"phy_rate_bps", c.external.phy_rate_bps}}}};
    ojson run = {{"test_id", c.run.test_id},
                 {"seed", c.run.seed},
                 {"workers", c.run.workers},
                 {"out_dir", c.run.out_dir.string()},
                 {"export_csv", c.run.export_csv},
                 {"export_json", c.run.export_json},
                 {"emit_events", c.run.emit_events}};
    if (c.run.overrides.k) run["k"] = *c.run.overrides.k;
    j["run"] = run;
    return j;
}

AppConfig load_config(const std::filesystem::path& p)
{
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open config " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
}

SweepPoint scenario_point(const AppConfig& c)
{
    if (!c.scenario) throw std::invalid_argument("config has no scenario section");
    SweepPoint p;
    p.test_id = "custom";
    p.index = 0;
    p.scenario = *c.scenario;
    p.selection = c.selection;
    p.traffic = TrafficProfile(c.per_sta_bps, p.scenario.n_sta, c.packet_length_bits);
    p.external = c.external;
    return p;
}

nlohmann::ordered_json grid_manifest()
{
    ojson tests = ojson::array();
    for (const auto& id : known_tests()) {
        auto points = build_test(id);
        std::set<std::string> configs;
        std::size_t deployments = 0;
        for (const auto& p : points) {
            configs.insert(to_string(p.scenario.topology_kind) + "/" + to_string(p.scenario.channel_plan) + "/" +
                           to_string(p.selection.mechanism));
            deployments += p.scenario.k;
        }
        tests.push_back({{"test_id", id},
                         {"points", points.size()},
                         {"k", points.front().scenario.k},
                         {"deployments", deployments},
                         {"configs", configs}});
    }
    return {{"tests", tests}};
}

}  // namespace homewifi
