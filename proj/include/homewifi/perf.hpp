#pragma once

#include "homewifi/model.hpp"
#include "homewifi/radio.hpp"

#include <map>
#include <vector>

namespace homewifi {

// Airtime utilization model of a single-contention-domain-per-channel WLAN.
//
// For every channel c the offered utilization is
//     U_c = sum_f (offered_f / L) * T_f
// where T_f is the per-packet airtime of flow f (DIFS, mean backoff, preamble,
// payload, SIFS, ACK). Above U_c = 1 every flow on c delivers a 1/U_c share;
// per-hop delay is T_f / (1 - U_c), or the delay cap once U_c >= 1.

enum class HopKind { Access, Backhaul, External };

std::string to_string(HopKind k);

struct Flow {
    NodeId src{};
    NodeId dst{};
    ChannelId channel{};
    double offered_bps = 0.0;
    double phy_rate_bps = 1.0;
    HopKind hop_kind = HopKind::Access;
};

struct MacOverheads {
    double difs_us = 28.0;
    double sifs_us = 10.0;
    double slot_us = 9.0;
    double avg_backoff_slots = 7.5;
    double ack_us = 32.0;
    double phy_preamble_us = 40.0;

    double fixed_us() const { return difs_us + avg_backoff_slots * slot_us + phy_preamble_us + sifs_us + ack_us; }
};

MacOverheads default_mac_overheads(Band b);
void validate(const MacOverheads& o);

struct PerfParams {
    MacOverheads mac_2g4 = default_mac_overheads(Band::Band2G4);
    MacOverheads mac_5g = default_mac_overheads(Band::Band5G);
    double delay_cap_ms = 10000.0;

    const MacOverheads& mac(Band b) const { return b == Band::Band2G4 ? mac_2g4 : mac_5g; }
};

/// Seconds of channel time one packet of `flow` occupies.
double flow_airtime_s(const Flow& flow, double packet_length_bits, const MacOverheads& o);

struct ChannelState {
    ChannelId channel{};
    double utilization = 0.0;
    double busy_fraction = 0.0;
    std::vector<Flow> flows;

    bool congested() const { return utilization > 1.0; }
};

struct StaPerf {
    double offered_bps = 0.0;
    double delivered_bps = 0.0;
    double delay_ms = 0.0;
};

struct PerfReport {
    std::map<NodeId, StaPerf> per_sta;
    std::map<ChannelId, ChannelState> per_channel;
    double network_throughput_pct = 100.0;
    double avg_delay_ms = 0.0;
    bool congested = false;
};

/// One access flow per associated STA, one backhaul flow per Extender link
/// carrying everything routed through it, and one flow per external load.
/// Throws if an STA is associated to a parent it cannot hear.
std::vector<Flow> build_flows(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                              const std::vector<ExternalLoad>& external);

std::vector<Flow> build_flows(const Topology& t, const TrafficProfile& traffic,
                              const std::vector<ExternalLoad>& external, const RadioEnvironment& env);

/// U_c per channel that carries at least one flow.
std::map<ChannelId, double> channel_utilization(const std::vector<Flow>& flows, double packet_length_bits,
                                                const PerfParams& params);

PerfReport evaluate(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                    const std::vector<ExternalLoad>& external, const PerfParams& params);

PerfReport evaluate(const Topology& t, const TrafficProfile& traffic, const std::vector<ExternalLoad>& external,
                    const RadioEnvironment& env, const PerfParams& params);

/// Busy fraction C = min(1, U_c), external traffic included. 0 for idle channels.
double busy_fraction(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                     const std::vector<ExternalLoad>& external, const PerfParams& params, const ChannelId& channel);

// ---------------------------------------------------------------------------
// Linearized form
// ---------------------------------------------------------------------------

struct PerfSummary {
    double network_throughput_pct = 100.0;
    double avg_delay_ms = 0.0;
    bool congested = false;
    std::size_t n_associated = 0;
};

/// The utilization model is linear in the association map: an STA attached to
/// a given parent adds a fixed airtime vector over channels (its access hop
/// plus every backhaul hop up to the AP). LoadModel precomputes those vectors
/// for one deployment so associations can be re-evaluated without rebuilding
/// flows. Its results agree with evaluate() to rounding.
class LoadModel {
public:
    /// Per STA index: index into targets(), or -1 when unassociated.
    using Assignment = std::vector<int>;

    LoadModel(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
              const std::vector<ExternalLoad>& external, const PerfParams& params);

    const std::vector<NodeId>& stas() const { return stas_; }
    const std::vector<NodeId>& targets() const { return targets_; }
    const std::vector<ChannelId>& channels() const { return channels_; }

    int sta_index(NodeId sta) const;
    int target_index(NodeId target) const;
    int channel_index(const ChannelId& c) const;

    Assignment assignment(const Topology& t) const;
    void apply(const Assignment& a, Topology& t) const;

    bool in_range(int sta, int target) const { return range_[cell(sta, target)]; }
    double access_rssi(int sta, int target) const { return rssi_[cell(sta, target)]; }
    double target_tx_power_dbm(int target) const { return tx_power_[static_cast<std::size_t>(target)]; }
    double sta_sensitivity_dbm(int sta) const { return sensitivity_[static_cast<std::size_t>(sta)]; }
    int access_channel(int target) const { return access_channel_[static_cast<std::size_t>(target)]; }
    /// Channel indices of the backhaul links from `target` up to the AP.
    const std::vector<int>& backhaul_channels(int target) const { return backhaul_channels_[static_cast<std::size_t>(target)]; }

    /// U_c for every channel in channels().
    std::vector<double> utilization(const Assignment& a) const;
    /// Adds (sign = +1) or removes (sign = -1) the airtime of `sta` attached to `target`.
    void accumulate(std::vector<double>& u, int sta, int target, double sign) const;

    PerfSummary summarize(const Assignment& a) const;

private:
    struct Hop {
        int channel;
        double airtime_s;
    };

    std::size_t cell(int sta, int target) const
    {
        return static_cast<std::size_t>(sta) * targets_.size() + static_cast<std::size_t>(target);
    }

    std::vector<NodeId> stas_;
    std::vector<NodeId> targets_;
    std::vector<ChannelId> channels_;
    std::vector<int> access_channel_;
    std::vector<double> tx_power_;
    std::vector<double> sensitivity_;
    std::vector<std::vector<int>> backhaul_channels_;
    std::vector<char> range_;
    std::vector<double> rssi_;
    std::vector<std::vector<Hop>> hops_;  // per (sta, target) cell
    std::vector<double> external_u_;
    double packets_per_s_ = 0.0;
    double per_sta_load_bps_ = 0.0;
    double delay_cap_ms_ = 0.0;
};

}  // namespace homewifi
