#include "homewifi/radio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace homewifi {

void validate(const PropagationParams& p)
{
    if (!(p.distance_power_loss_coeff > 0.0)) throw std::invalid_argument("distance power loss coefficient must be > 0");
    if (!(p.min_distance_m > 0.0)) throw std::invalid_argument("minimum distance must be > 0");
    for (double f : p.band_frequency_mhz)
        if (!(f > 0.0 && f < 100000.0)) throw std::invalid_argument("band frequency must be in (0, 100000) MHz");
}

double path_loss_db(double f_mhz, double d_m, const PropagationParams& p)
{
    if (!(f_mhz > 0.0)) throw std::invalid_argument("path_loss_db: frequency must be positive");
    double d = std::max(d_m, p.min_distance_m);
    return 20.0 * std::log10(f_mhz) + p.distance_power_loss_coeff * std::log10(d) + p.floor_penetration_db +
           p.constant_offset_db;
}

double rssi_dbm(const RadioConfig& tx, const Position& tx_pos, const Position& rx_pos, const PropagationParams& p)
{
    return tx.tx_power_dbm - path_loss_db(p.frequency_mhz(tx.band), distance(tx_pos, rx_pos), p);
}

double max_range_m(const RadioConfig& tx, double threshold_dbm, const PropagationParams& p)
{
    if (!(threshold_dbm < tx.tx_power_dbm))
        throw std::invalid_argument("max_range_m: threshold must be below transmit power");
    double budget = tx.tx_power_dbm - threshold_dbm - p.constant_offset_db - p.floor_penetration_db -
                    20.0 * std::log10(p.frequency_mhz(tx.band));
    return std::pow(10.0, budget / p.distance_power_loss_coeff);
}

// ---------------------------------------------------------------------------

double McsEntry::rate_bps(int spatial_streams) const
{
    switch (spatial_streams) {
    case 1: return rate_bps_1ss;
    case 2: return rate_bps_2ss;
    default: return rate_bps_1ss * spatial_streams;
    }
}

void validate(const McsTable& t, double sensitivity_floor_dbm)
{
    if (t.entries.empty()) throw std::invalid_argument("MCS table for " + to_string(t.band) + " is empty");
    if (!(t.channel_width_mhz > 0.0)) throw std::invalid_argument("MCS table channel width must be positive");
    if (t.entries.front().min_rssi_dbm < sensitivity_floor_dbm)
        throw std::invalid_argument("MCS table entry 0 lies below the receiver sensitivity");
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const auto& e = t.entries[i];
        if (!(e.rate_bps_1ss > 0.0 && e.rate_bps_2ss > 0.0))
            throw std::invalid_argument("MCS " + std::to_string(e.mcs) + " has a non-positive rate");
        if (i == 0) continue;
        const auto& prev = t.entries[i - 1];
        if (!(e.min_rssi_dbm > prev.min_rssi_dbm) || !(e.rate_bps_1ss > prev.rate_bps_1ss) ||
            !(e.rate_bps_2ss > prev.rate_bps_2ss))
            throw std::invalid_argument("MCS table for " + to_string(t.band) +
                                        " must be strictly increasing (entry " + std::to_string(i) + ")");
    }
}

std::optional<McsChoice> mcs_for_rssi(const McsTable& table, double rssi, int spatial_streams)
{
    std::optional<McsChoice> best;
    for (const auto& e : table.entries) {
        if (e.min_rssi_dbm > rssi) break;
        best = McsChoice{e.mcs, e.rate_bps(spatial_streams)};
    }
    return best;
}

McsTable default_mcs_table_2g4()
{
    return McsTable{Band::Band2G4,
                    20.0,
                    {
                        {0, -82.0, 7.2e6, 14.4e6},
                        {1, -79.0, 14.4e6, 28.9e6},
                        {2, -76.0, 21.7e6, 43.3e6},
                        {3, -73.0, 28.9e6, 57.8e6},
                        {4, -69.0, 43.3e6, 86.7e6},
                        {5, -65.0, 57.8e6, 115.6e6},
                        {6, -61.0, 65.0e6, 130.0e6},
                        {7, -57.0, 72.2e6, 144.4e6},
                    }};
}

McsTable default_mcs_table_5g()
{
    return McsTable{Band::Band5G,
                    80.0,
                    {
                        {0, -82.0, 32.5e6, 65.0e6},
                        {1, -79.0, 65.0e6, 130.0e6},
                        {2, -76.0, 97.5e6, 195.0e6},
                        {3, -73.0, 130.0e6, 260.0e6},
                        {4, -70.0, 195.0e6, 390.0e6},
                        {5, -66.0, 260.0e6, 520.0e6},
                        {6, -63.0, 292.5e6, 585.0e6},
                        {7, -60.0, 325.0e6, 650.0e6},
                        {8, -57.0, 390.0e6, 780.0e6},
                        {9, -54.0, 433.3e6, 866.7e6},
                    }};
}

double link_phy_rate_bps(const McsTable& table, double rssi, int spatial_streams)
{
    if (auto m = mcs_for_rssi(table, rssi, spatial_streams)) return m->phy_rate_bps;
    return table.entries.front().rate_bps(spatial_streams);
}

// ---------------------------------------------------------------------------

LinkBudget::LinkBudget(const Topology& t, const RadioEnvironment& env, const RssiOverrides& overrides)
    : targets_(t.access_points())
{
    auto pinned = [&](NodeId a, NodeId b) -> std::optional<double> {
        if (auto it = overrides.find({a, b}); it != overrides.end()) return it->second;
        if (auto it = overrides.find({b, a}); it != overrides.end()) return it->second;
        return std::nullopt;
    };

    for (NodeId sta : t.stas()) {
        const Node& s = t.node(sta);
        const RadioConfig& rx = s.access_radio();
        for (NodeId target : targets_) {
            const Node& ap = t.node(target);
            const RadioConfig& tx = ap.access_radio();
            double rssi = pinned(target, sta).value_or(rssi_dbm(tx, ap.position, s.position, env.propagation));
            bool usable = rssi >= rx.sensitivity_dbm;
            int ss = std::min(tx.spatial_streams, rx.spatial_streams);
            double rate = link_phy_rate_bps(env.mcs.for_band(tx.band), rssi, ss);
            access_[{sta, target}] = Link{rssi, rate, usable};
        }
    }

    for (const auto& [child, parent] : t.backhaul_parents()) {
        if (!t.contains(child) || !t.contains(parent)) continue;
        const Node& c = t.node(child);
        const Node& p = t.node(parent);
        const RadioConfig& tx = p.backhaul_radio();
        const RadioConfig& rx = c.backhaul_radio();
        double rssi = pinned(parent, child).value_or(rssi_dbm(tx, p.position, c.position, env.propagation));
        int ss = std::min(tx.spatial_streams, rx.spatial_streams);
        double rate = link_phy_rate_bps(env.mcs.for_band(tx.band), rssi, ss);
        backhaul_[child] = Link{rssi, rate, rssi >= rx.sensitivity_dbm};
    }
}

double LinkBudget::access_rssi(NodeId sta, NodeId target) const
{
    auto it = access_.find({sta, target});
    if (it == access_.end())
        throw std::out_of_range("no access link " + std::to_string(sta.value) + "->" + std::to_string(target.value));
    return it->second.rssi;
}

bool LinkBudget::in_range(NodeId sta, NodeId target) const
{
    auto it = access_.find({sta, target});
    return it != access_.end() && it->second.usable;
}

double LinkBudget::access_rate_bps(NodeId sta, NodeId target) const
{
    auto it = access_.find({sta, target});
    if (it == access_.end())
        throw std::out_of_range("no access link " + std::to_string(sta.value) + "->" + std::to_string(target.value));
    return it->second.rate;
}

double LinkBudget::backhaul_rssi(NodeId extender) const
{
    auto it = backhaul_.find(extender);
    if (it == backhaul_.end()) throw std::out_of_range("no backhaul link for node " + std::to_string(extender.value));
    return it->second.rssi;
}

double LinkBudget::backhaul_rate_bps(NodeId extender) const
{
    auto it = backhaul_.find(extender);
    if (it == backhaul_.end()) throw std::out_of_range("no backhaul link for node " + std::to_string(extender.value));
    return it->second.rate;
}

std::vector<NodeId> LinkBudget::in_range_targets(NodeId sta) const
{
    std::vector<NodeId> out;
    for (NodeId t : targets_)
        if (in_range(sta, t)) out.push_back(t);
    return out;
}

}  // namespace homewifi
