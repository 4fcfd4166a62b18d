#include "homewifi/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <ostream>

namespace homewifi {

std::string to_string(MeasurementMode m)
{
    switch (m) {
    case MeasurementMode::ActiveScan: return "active";
    case MeasurementMode::PassiveScan: return "passive";
    case MeasurementMode::BeaconTable: return "beacon-table";
    }
    return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::json channel_json(const ChannelId& c)
{
    return {{"band", to_string(c.band)}, {"number", c.number}};
}

nlohmann::json frame_fields(const Frame& f)
{
    using nlohmann::json;
    return std::visit(
        overloaded{
            [](const BeaconRequest& r) {
                json chans = json::array();
                for (const auto& c : r.channels) chans.push_back(channel_json(c));
                return json{{"mode", to_string(r.mode)}, {"channels", chans}};
            },
            [](const BeaconReport& r) {
                json entries = json::array();
                for (const auto& e : r.entries)
                    entries.push_back({{"bssid", e.bssid.value},
                                       {"frequency", to_string(e.frequency)},
                                       {"channel", channel_json(e.channel)},
                                       {"rssi_dbm", e.rssi_dbm}});
                return json{{"entries", entries}};
            },
            [](const ChannelLoadRequest& r) { return json{{"channel", channel_json(r.channel)}}; },
            [](const ChannelLoadReport& r) {
                return json{{"channel", channel_json(r.channel)},
                            {"busy_fraction", r.busy_fraction},
                            {"measurement_duration_ms", r.measurement_duration_ms}};
            },
            [](const BtmQuery&) { return json::object(); },
            [](const BtmRequest& r) {
                json cands = json::array();
                for (const auto& e : r.candidates.entries)
                    cands.push_back({{"target", e.target.value}, {"channel", channel_json(e.channel)}, {"score", e.score}});
                return json{{"sta", r.candidates.sta.value}, {"candidates", cands}};
            },
            [](const BtmResponse& r) { return json{{"accept", r.accept}}; },
            [](const AssocRequest& r) {
                return json{{"sta", r.sta.value}, {"target", r.target.value}, {"reassociation", r.reassociation}};
            },
            [](const AssocResponse& r) {
                return json{{"accepted", r.accepted}, {"supports_11kv", r.supports_11kv_echo}};
            },
            [](const AssocNotify& r) {
                return json{{"sta", r.sta.value}, {"parent", r.parent.value}, {"supports_11kv", r.supports_11kv}};
            },
            [](const DecisionSkipped& r) { return json{{"sta", r.sta.value}, {"reason", r.reason}}; },
        },
        f);
}

}  // namespace

std::string frame_type(const Frame& f)
{
    return std::visit(overloaded{
                          [](const BeaconRequest&) { return std::string("BeaconRequest"); },
                          [](const BeaconReport&) { return std::string("BeaconReport"); },
                          [](const ChannelLoadRequest&) { return std::string("ChannelLoadRequest"); },
                          [](const ChannelLoadReport&) { return std::string("ChannelLoadReport"); },
                          [](const BtmQuery&) { return std::string("BtmQuery"); },
                          [](const BtmRequest&) { return std::string("BtmRequest"); },
                          [](const BtmResponse&) { return std::string("BtmResponse"); },
                          [](const AssocRequest&) { return std::string("AssocRequest"); },
                          [](const AssocResponse&) { return std::string("AssocResponse"); },
                          [](const AssocNotify&) { return std::string("AssocNotify"); },
                          [](const DecisionSkipped&) { return std::string("DecisionSkipped"); },
                      },
                      f);
}

void EventLog::push(NodeId src, NodeId dst, Frame f)
{
    events_.push_back(Event{events_.size(), src, dst, std::move(f)});
}

void EventLog::append(const EventLog& other)
{
    for (const auto& e : other.events_) push(e.src, e.dst, e.frame);
}

void EventLog::write_jsonl(std::ostream& os) const
{
    for (const auto& e : events_) {
        nlohmann::ordered_json line;
        line["step"] = e.step;
        line["src"] = e.src.value;
        line["dst"] = e.dst.value;
        line["type"] = frame_type(e.frame);
        const nlohmann::json fields = frame_fields(e.frame);
        for (const auto& [k, v] : fields.items()) line[k] = v;
        os << line.dump() << '\n';
    }
}

std::size_t count_kv_frames(const EventLog& log)
{
    return static_cast<std::size_t>(std::count_if(log.events().begin(), log.events().end(), [](const Event& e) {
        return std::holds_alternative<BeaconRequest>(e.frame) || std::holds_alternative<BeaconReport>(e.frame) ||
               std::holds_alternative<ChannelLoadRequest>(e.frame) ||
               std::holds_alternative<ChannelLoadReport>(e.frame) || std::holds_alternative<BtmQuery>(e.frame) ||
               std::holds_alternative<BtmRequest>(e.frame) || std::holds_alternative<BtmResponse>(e.frame);
    }));
}

std::vector<NodeId> stage_order_violations(const EventLog& log)
{
    // Per-STA stage numbers: 1 assoc, 2 beacon request, 3 beacon report, 4 BTM request,
    // 5 BTM response, 6 reassociation. A new beacon request may restart the cycle at 2
    // only after the previous cycle finished (stage >= 5) or before any 11k frame.
    std::map<NodeId, int> stage;
    std::set<NodeId> bad;

    auto advance = [&](NodeId sta, int next) {
        int& cur = stage[sta];
        bool ok = false;
        switch (next) {
        case 1: ok = cur == 0; break;
        case 2: ok = cur == 1 || cur >= 5; break;
        case 3: ok = cur == 2; break;
        case 4: ok = cur == 3; break;
        case 5: ok = cur == 4; break;
        case 6: ok = cur == 5 || cur == 6; break;
        }
        if (!ok) bad.insert(sta);
        cur = next;
    };

    for (const auto& e : log.events()) {
        std::visit(overloaded{
                       [&](const AssocRequest& r) { advance(r.sta, r.reassociation ? 6 : 1); },
                       [&](const BeaconRequest&) { advance(e.dst, 2); },
                       [&](const BeaconReport&) { advance(e.src, 3); },
                       [&](const BtmRequest& r) { advance(r.candidates.sta, 4); },
                       [&](const BtmResponse&) { advance(e.src, 5); },
                       [](const auto&) {},
                   },
                   e.frame);
    }
    return {bad.begin(), bad.end()};
}

// ---------------------------------------------------------------------------

StageResult stage1_initial_association(Topology t, const LinkBudget& links, TieBreak tie_break)
{
    EventLog log;
    for (NodeId sta : t.stas()) {
        auto target = best_rssi_target(links, sta, tie_break);
        if (!target) continue;
        bool kv = t.node(sta).supports_11kv;
        log.push(sta, *target, AssocRequest{sta, *target, false});
        t.associate(sta, *target);
        log.push(*target, sta, AssocResponse{true, kv});
        if (*target != kApId) log.push(*target, kApId, AssocNotify{sta, *target, kv});
    }
    return {std::move(t), std::move(log)};
}

Collection stage2_collect(const Topology& t, const LoadContext& ctx, MeasurementMode mode,
                          const std::set<NodeId>& stas, double measurement_duration_ms)
{
    Collection out;
    std::vector<ChannelId> access_channels;
    for (NodeId ap : t.access_points()) {
        const ChannelId& c = t.node(ap).access_radio().channel;
        if (std::find(access_channels.begin(), access_channels.end(), c) == access_channels.end())
            access_channels.push_back(c);
    }

    for (NodeId sta : stas) {
        const Node& s = t.node(sta);
        auto parent = t.parent_of(sta);
        if (!s.supports_11kv || !parent) continue;
        out.log.push(kApId, sta, BeaconRequest{mode, access_channels});
        BeaconReport report;
        for (NodeId target : ctx.links.in_range_targets(sta)) {
            const RadioConfig& r = t.node(target).access_radio();
            report.entries.push_back({target, r.band, r.channel, ctx.links.access_rssi(sta, target)});
        }
        out.log.push(sta, kApId, report);
        out.beacon_reports.emplace(sta, std::move(report));
    }

    auto u = channel_utilization(build_flows(t, ctx.links, ctx.traffic, ctx.external),
                                 ctx.traffic.packet_length_bits(), ctx.params);
    auto busy = [&](const ChannelId& c) {
        auto it = u.find(c);
        return it == u.end() ? 0.0 : std::min(1.0, it->second);
    };
    for (NodeId ap : t.access_points()) {
        std::vector<ChannelId> measured{t.node(ap).access_radio().channel};
        if (ap != kApId) measured.push_back(t.node(ap).backhaul_radio().channel);
        for (const auto& c : measured) {
            out.log.push(kApId, ap, ChannelLoadRequest{c});
            ChannelLoadReport r{c, busy(c), measurement_duration_ms};
            out.log.push(ap, kApId, r);
            out.load_reports.emplace(std::pair{ap, c}, r);
        }
    }
    return out;
}

Decision stage3_decide(const Topology& t, const LoadContext& ctx, const Collection& reports,
                       const SelectionConfig& cfg)
{
    Decision out;
    if (cfg.mechanism == Mechanism::RssiBased) return out;

    LoadModel model(t, ctx.links, ctx.traffic, ctx.external, ctx.params);
    auto assignment = model.assignment(t);
    for (const auto& [sta, beacon] : reports.beacon_reports) {
        CandidateList list = rank_candidates(model, assignment, model.sta_index(sta), cfg);
        std::erase_if(list.entries, [&](const CandidateEntry& e) {
            return std::none_of(beacon.entries.begin(), beacon.entries.end(),
                                [&](const BeaconReportEntry& b) { return b.bssid == e.target; });
        });
        if (list.empty()) {
            out.log.push(kApId, kApId, DecisionSkipped{sta, "no candidate in range"});
            continue;
        }
        BtmRequest req{list};
        out.log.push(kApId, sta, req);
        out.requests.emplace(sta, std::move(req));
    }
    return out;
}

ReassociationResult stage4_reassociate(Topology t, const LinkBudget& links,
                                       const std::map<NodeId, BtmRequest>& requests)
{
    ReassociationResult out{std::move(t), {}, {}};
    Topology& topo = out.topology;
    for (const auto& [sta, req] : requests) {
        auto current = topo.parent_of(sta);
        out.log.push(sta, current.value_or(kApId), BtmResponse{true});
        bool kv = topo.node(sta).supports_11kv;
        for (const auto& cand : req.candidates.entries) {
            if (current && cand.target == *current) break;
            bool feasible = links.in_range(sta, cand.target);
            out.log.push(sta, cand.target, AssocRequest{sta, cand.target, true});
            out.log.push(cand.target, sta, AssocResponse{feasible, kv});
            if (!feasible) continue;
            topo.associate(sta, cand.target);
            out.log.push(cand.target, kApId, AssocNotify{sta, cand.target, kv});
            out.moves.push_back(Move{sta, current.value_or(kApId), cand.target});
            break;
        }
    }
    return out;
}

ProtocolRun run_load_balancing(Topology associated, const LoadContext& ctx, const SelectionConfig& cfg,
                               const std::set<NodeId>& capable, MeasurementMode mode)
{
    ProtocolRun run{std::move(associated), {}, {}};
    if (cfg.mechanism == Mechanism::RssiBased) return run;

    auto round = [&](const std::set<NodeId>& stas) {
        Collection c = stage2_collect(run.topology, ctx, mode, stas);
        Decision d = stage3_decide(run.topology, ctx, c, cfg);
        ReassociationResult r = stage4_reassociate(run.topology, ctx.links, d.requests);
        run.log.append(c.log);
        run.log.append(d.log);
        run.log.append(r.log);
        run.topology = std::move(r.topology);
        run.moves.insert(run.moves.end(), r.moves.begin(), r.moves.end());
        return r.moves.size();
    };

    for (int pass = 0; pass < cfg.passes; ++pass) {
        std::size_t moved = 0;
        if (cfg.refresh == LoadRefresh::FrozenSnapshot) {
            moved = round(capable);
        } else {
            for (NodeId sta : capable) moved += round({sta});
        }
        if (moved == 0) break;
    }
    return run;
}

ProtocolRun run_protocol(Topology unassociated, const LoadContext& ctx, const SelectionConfig& cfg,
                         const std::set<NodeId>& capable, MeasurementMode mode)
{
    StageResult s1 = stage1_initial_association(std::move(unassociated), ctx.links, cfg.tie_break);
    ProtocolRun run = run_load_balancing(std::move(s1.topology), ctx, cfg, capable, mode);
    EventLog log = std::move(s1.log);
    log.append(run.log);
    run.log = std::move(log);
    return run;
}

}  // namespace homewifi
