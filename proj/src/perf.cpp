#include "homewifi/perf.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace homewifi {

std::string to_string(HopKind k)
{
    switch (k) {
    case HopKind::Access: return "access";
    case HopKind::Backhaul: return "backhaul";
    case HopKind::External: return "external";
    }
    return "?";
}

MacOverheads default_mac_overheads(Band b)
{
    MacOverheads o;
    if (b == Band::Band5G) {
        o.difs_us = 34.0;
        o.sifs_us = 16.0;
    }
    return o;
}

void validate(const MacOverheads& o)
{
    for (double v : {o.difs_us, o.sifs_us, o.slot_us, o.avg_backoff_slots, o.ack_us, o.phy_preamble_us})
        if (!(v >= 0.0)) throw std::invalid_argument("MAC overheads must be non-negative");
}

double flow_airtime_s(const Flow& flow, double packet_length_bits, const MacOverheads& o)
{
    if (!(flow.phy_rate_bps > 0.0)) throw std::invalid_argument("flow_airtime_s: PHY rate must be positive");
    if (!(packet_length_bits > 0.0)) throw std::invalid_argument("flow_airtime_s: packet length must be positive");
    return o.fixed_us() * 1e-6 + packet_length_bits / flow.phy_rate_bps;
}

// ---------------------------------------------------------------------------

std::vector<Flow> build_flows(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                              const std::vector<ExternalLoad>& external)
{
    std::vector<Flow> flows;
    std::map<NodeId, double> relayed;  // Extender -> load entering its backhaul link

    for (const auto& [sta, parent] : t.associations()) {
        if (!links.in_range(sta, parent))
            throw std::logic_error("STA " + std::to_string(sta.value) + " is associated to node " +
                                   std::to_string(parent.value) + " below its sensitivity");
        const Node& p = t.node(parent);
        flows.push_back(Flow{sta, parent, p.access_radio().channel, traffic.per_sta_load_bps(),
                             links.access_rate_bps(sta, parent), HopKind::Access});
        for (const auto& link : backhaul_path(t, parent)) relayed[link.child] += traffic.per_sta_load_bps();
    }

    for (const auto& [child, load] : relayed) {
        NodeId parent = t.backhaul_parents().at(child);
        flows.push_back(Flow{child, parent, t.node(child).backhaul_radio().channel, load,
                             links.backhaul_rate_bps(child), HopKind::Backhaul});
    }

    for (const auto& e : external) {
        validate(e);
        flows.push_back(Flow{NodeId{}, NodeId{}, e.channel, e.load_bps, e.phy_rate_bps, HopKind::External});
    }
    return flows;
}

std::vector<Flow> build_flows(const Topology& t, const TrafficProfile& traffic,
                              const std::vector<ExternalLoad>& external, const RadioEnvironment& env)
{
    return build_flows(t, LinkBudget(t, env), traffic, external);
}

std::map<ChannelId, double> channel_utilization(const std::vector<Flow>& flows, double packet_length_bits,
                                                const PerfParams& params)
{
    std::map<ChannelId, double> u;
    for (const auto& f : flows)
        u[f.channel] += f.offered_bps / packet_length_bits *
                        flow_airtime_s(f, packet_length_bits, params.mac(f.channel.band));
    return u;
}

PerfReport evaluate(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                    const std::vector<ExternalLoad>& external, const PerfParams& params)
{
    const double L = traffic.packet_length_bits();
    auto flows = build_flows(t, links, traffic, external);

    PerfReport report;
    for (const auto& f : flows) {
        auto& ch = report.per_channel[f.channel];
        ch.channel = f.channel;
        ch.flows.push_back(f);
        ch.utilization += f.offered_bps / L * flow_airtime_s(f, L, params.mac(f.channel.band));
    }
    for (auto& [id, ch] : report.per_channel) {
        ch.busy_fraction = std::min(1.0, ch.utilization);
        report.congested = report.congested || ch.congested();
    }

    auto hop = [&](const ChannelId& c, double phy_rate) {
        double u = report.per_channel.at(c).utilization;
        Flow probe{};
        probe.phy_rate_bps = phy_rate;
        double airtime = flow_airtime_s(probe, L, params.mac(c.band));
        double fraction = u > 1.0 ? 1.0 / u : 1.0;
        double delay = u < 1.0 ? airtime / (1.0 - u) * 1e3 : params.delay_cap_ms;
        return std::pair{fraction, delay};
    };

    double offered = 0.0;
    double delivered = 0.0;
    double delay_sum = 0.0;
    for (const auto& [sta, parent] : t.associations()) {
        StaPerf s;
        s.offered_bps = traffic.per_sta_load_bps();
        double fraction = 1.0;

        auto [fa, da] = hop(t.node(parent).access_radio().channel, links.access_rate_bps(sta, parent));
        fraction *= fa;
        s.delay_ms += da;
        for (const auto& link : backhaul_path(t, parent)) {
            auto [fb, db] = hop(t.node(link.child).backhaul_radio().channel, links.backhaul_rate_bps(link.child));
            fraction *= fb;
            s.delay_ms += db;
        }
        s.delivered_bps = s.offered_bps * fraction;

        offered += s.offered_bps;
        delivered += s.delivered_bps;
        delay_sum += s.delay_ms;
        report.per_sta.emplace(sta, s);
    }

    if (offered > 0.0) report.network_throughput_pct = std::clamp(100.0 * (delivered / offered), 0.0, 100.0);
    if (!report.per_sta.empty()) report.avg_delay_ms = delay_sum / static_cast<double>(report.per_sta.size());
    return report;
}

PerfReport evaluate(const Topology& t, const TrafficProfile& traffic, const std::vector<ExternalLoad>& external,
                    const RadioEnvironment& env, const PerfParams& params)
{
    return evaluate(t, LinkBudget(t, env), traffic, external, params);
}

double busy_fraction(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                     const std::vector<ExternalLoad>& external, const PerfParams& params, const ChannelId& channel)
{
    auto u = channel_utilization(build_flows(t, links, traffic, external), traffic.packet_length_bits(), params);
    auto it = u.find(channel);
    return it == u.end() ? 0.0 : std::min(1.0, it->second);
}

// ---------------------------------------------------------------------------

LoadModel::LoadModel(const Topology& t, const LinkBudget& links, const TrafficProfile& traffic,
                     const std::vector<ExternalLoad>& external, const PerfParams& params)
    : stas_(t.stas()),
      targets_(t.access_points()),
      packets_per_s_(traffic.per_sta_load_bps() / traffic.packet_length_bits()),
      per_sta_load_bps_(traffic.per_sta_load_bps()),
      delay_cap_ms_(params.delay_cap_ms)
{
    const double L = traffic.packet_length_bits();
    auto intern = [&](const ChannelId& c) {
        for (std::size_t i = 0; i < channels_.size(); ++i)
            if (channels_[i] == c) return static_cast<int>(i);
        channels_.push_back(c);
        return static_cast<int>(channels_.size() - 1);
    };
    auto airtime = [&](const ChannelId& c, double rate) {
        Flow probe{};
        probe.phy_rate_bps = rate;
        return flow_airtime_s(probe, L, params.mac(c.band));
    };

    std::vector<std::vector<Hop>> backhaul_hops;
    for (NodeId target : targets_) {
        const Node& n = t.node(target);
        access_channel_.push_back(intern(n.access_radio().channel));
        tx_power_.push_back(n.access_radio().tx_power_dbm);
        std::vector<int> chans;
        std::vector<Hop> hops;
        for (const auto& link : backhaul_path(t, target)) {
            const ChannelId& c = t.node(link.child).backhaul_radio().channel;
            int ci = intern(c);
            chans.push_back(ci);
            hops.push_back({ci, airtime(c, links.backhaul_rate_bps(link.child))});
        }
        backhaul_channels_.push_back(std::move(chans));
        backhaul_hops.push_back(std::move(hops));
    }

    external_u_.assign(channels_.size(), 0.0);
    for (const auto& e : external) {
        validate(e);
        int ci = intern(e.channel);
        external_u_.resize(channels_.size(), 0.0);
        Flow f{};
        f.phy_rate_bps = e.phy_rate_bps;
        external_u_[static_cast<std::size_t>(ci)] += e.load_bps / L * flow_airtime_s(f, L, params.mac(e.channel.band));
    }

    for (NodeId sta : stas_) sensitivity_.push_back(t.node(sta).access_radio().sensitivity_dbm);

    const std::size_t cells = stas_.size() * targets_.size();
    range_.resize(cells);
    rssi_.resize(cells);
    hops_.resize(cells);
    for (std::size_t s = 0; s < stas_.size(); ++s) {
        for (std::size_t a = 0; a < targets_.size(); ++a) {
            std::size_t k = s * targets_.size() + a;
            range_[k] = links.in_range(stas_[s], targets_[a]) ? 1 : 0;
            rssi_[k] = links.access_rssi(stas_[s], targets_[a]);
            const ChannelId& c = channels_[static_cast<std::size_t>(access_channel_[a])];
            hops_[k].push_back({access_channel_[a], airtime(c, links.access_rate_bps(stas_[s], targets_[a]))});
            for (const auto& h : backhaul_hops[a]) hops_[k].push_back(h);
        }
    }
}

int LoadModel::sta_index(NodeId sta) const
{
    auto it = std::lower_bound(stas_.begin(), stas_.end(), sta);
    if (it == stas_.end() || *it != sta) throw std::out_of_range("unknown STA " + std::to_string(sta.value));
    return static_cast<int>(it - stas_.begin());
}

int LoadModel::target_index(NodeId target) const
{
    for (std::size_t i = 0; i < targets_.size(); ++i)
        if (targets_[i] == target) return static_cast<int>(i);
    throw std::out_of_range("unknown AP/Extender " + std::to_string(target.value));
}

int LoadModel::channel_index(const ChannelId& c) const
{
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (channels_[i] == c) return static_cast<int>(i);
    return -1;
}

LoadModel::Assignment LoadModel::assignment(const Topology& t) const
{
    Assignment a(stas_.size(), -1);
    for (std::size_t s = 0; s < stas_.size(); ++s)
        if (auto p = t.parent_of(stas_[s])) a[s] = target_index(*p);
    return a;
}

void LoadModel::apply(const Assignment& a, Topology& t) const
{
    for (std::size_t s = 0; s < stas_.size(); ++s) {
        if (a[s] < 0)
            t.disassociate(stas_[s]);
        else
            t.associate(stas_[s], targets_[static_cast<std::size_t>(a[s])]);
    }
}

void LoadModel::accumulate(std::vector<double>& u, int sta, int target, double sign) const
{
    for (const auto& h : hops_[cell(sta, target)])
        u[static_cast<std::size_t>(h.channel)] += sign * packets_per_s_ * h.airtime_s;
}

std::vector<double> LoadModel::utilization(const Assignment& a) const
{
    std::vector<double> u = external_u_;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (a[s] >= 0) accumulate(u, static_cast<int>(s), a[s], 1.0);
    return u;
}

PerfSummary LoadModel::summarize(const Assignment& a) const
{
    auto u = utilization(a);
    PerfSummary out;
    for (double x : u) out.congested = out.congested || x > 1.0;

    double offered = 0.0;
    double delivered = 0.0;
    double delay_sum = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (a[s] < 0) continue;
        if (!range_[cell(static_cast<int>(s), a[s])])
            throw std::logic_error("STA " + std::to_string(stas_[s].value) + " is associated below its sensitivity");
        double fraction = 1.0;
        double delay = 0.0;
        for (const auto& h : hops_[cell(static_cast<int>(s), a[s])]) {
            double uc = u[static_cast<std::size_t>(h.channel)];
            if (uc > 1.0) fraction *= 1.0 / uc;
            delay += uc < 1.0 ? h.airtime_s / (1.0 - uc) * 1e3 : delay_cap_ms_;
        }
        offered += per_sta_load_bps_;
        delivered += per_sta_load_bps_ * fraction;
        delay_sum += delay;
        ++out.n_associated;
    }
    if (offered > 0.0) out.network_throughput_pct = std::clamp(100.0 * (delivered / offered), 0.0, 100.0);
    if (out.n_associated > 0) out.avg_delay_ms = delay_sum / static_cast<double>(out.n_associated);
    return out;
}

}  // namespace homewifi
