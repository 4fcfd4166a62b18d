#include "homewifi/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace homewifi {

std::string to_string(Mechanism m)
{
    return m == Mechanism::RssiBased ? "rssi" : "loadaware";
}

Mechanism parse_mechanism(const std::string& s)
{
    if (s == "rssi" || s == "RssiBased" || s == "rssi-based") return Mechanism::RssiBased;
    if (s == "loadaware" || s == "LoadAware" || s == "load-aware") return Mechanism::LoadAware;
    throw std::invalid_argument("unknown mechanism '" + s + "' (expected rssi|loadaware)");
}

void validate(const SelectionConfig& cfg)
{
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
    if (!(cfg.beta_pct >= 0.0 && cfg.beta_pct <= 100.0)) throw std::invalid_argument("beta must be in [0, 100] %");
    if (cfg.passes < 1) throw std::invalid_argument("at least one reassociation pass is required");
}

double weighted_rssi(double rssi, double p_t, double s)
{
    if (!(s < p_t)) throw std::invalid_argument("weighted_rssi: sensitivity must be below transmit power");
    double r = std::clamp(rssi, s, p_t);
    return (p_t - r) / (p_t - s);
}

double compose_score(double alpha, double weighted, double access_load, double backhaul_load_sum)
{
    return alpha * (weighted + access_load) + (1.0 - alpha) * backhaul_load_sum;
}

CandidateScore score(const Topology& t, const LinkBudget& links, NodeId sta, NodeId target, const LoadMap& loads,
                     const SelectionConfig& cfg)
{
    if (!links.in_range(sta, target))
        throw std::invalid_argument("score: node " + std::to_string(target.value) + " is below the sensitivity of STA " +
                                    std::to_string(sta.value));
    auto load_of = [&](const ChannelId& c) {
        auto it = loads.find(c);
        return it == loads.end() ? 0.0 : it->second;
    };

    const Node& ap = t.node(target);
    CandidateScore out;
    out.sta = sta;
    out.target = target;
    out.rssi_dbm = links.access_rssi(sta, target);
    out.weighted_rssi =
        weighted_rssi(out.rssi_dbm, ap.access_radio().tx_power_dbm, t.node(sta).access_radio().sensitivity_dbm);
    out.access_load = load_of(ap.access_radio().channel);
    for (const auto& link : backhaul_path(t, target))
        out.backhaul_load_sum += load_of(t.node(link.child).backhaul_radio().channel);
    out.score = compose_score(cfg.alpha, out.weighted_rssi, out.access_load, out.backhaul_load_sum);
    return out;
}

LoadMap measure_loads(const Topology& t, const LoadContext& ctx)
{
    auto u = channel_utilization(build_flows(t, ctx.links, ctx.traffic, ctx.external),
                                 ctx.traffic.packet_length_bits(), ctx.params);
    LoadMap out;
    for (const auto& [c, x] : u) out[c] = std::min(1.0, x);
    return out;
}

namespace {

bool precedes(const CandidateEntry& a, const CandidateEntry& b, TieBreak tb)
{
    if (a.score != b.score) return a.score < b.score;
    if (tb == TieBreak::ApFirstThenLowestId) {
        bool a_ap = a.target == kApId;
        bool b_ap = b.target == kApId;
        if (a_ap != b_ap) return a_ap;
    }
    return a.target < b.target;
}

}  // namespace

CandidateList rank_candidates(const LoadModel& model, const LoadModel::Assignment& assignment, int sta,
                              const SelectionConfig& cfg)
{
    CandidateList list;
    list.sta = model.stas()[static_cast<std::size_t>(sta)];
    const int n_targets = static_cast<int>(model.targets().size());

    std::vector<double> base;
    if (cfg.mechanism == Mechanism::LoadAware) {
        base = model.utilization(assignment);
        int cur = assignment[static_cast<std::size_t>(sta)];
        if (cur >= 0) model.accumulate(base, sta, cur, -1.0);
    }

    std::vector<double> u;
    for (int a = 0; a < n_targets; ++a) {
        if (!model.in_range(sta, a)) continue;
        CandidateEntry e;
        e.target = model.targets()[static_cast<std::size_t>(a)];
        e.channel = model.channels()[static_cast<std::size_t>(model.access_channel(a))];
        double rssi = model.access_rssi(sta, a);

        if (cfg.mechanism == Mechanism::RssiBased) {
            e.score = -rssi;
        } else {
            u = base;
            if (cfg.self_load == SelfLoad::Include) model.accumulate(u, sta, a, 1.0);
            auto load = [&](int c) { return std::min(1.0, u[static_cast<std::size_t>(c)]); };

            CandidateScore d;
            d.sta = list.sta;
            d.target = e.target;
            d.rssi_dbm = rssi;
            d.weighted_rssi = weighted_rssi(rssi, model.target_tx_power_dbm(a), model.sta_sensitivity_dbm(sta));
            d.access_load = load(model.access_channel(a));
            for (int c : model.backhaul_channels(a)) d.backhaul_load_sum += load(c);
            d.score = compose_score(cfg.alpha, d.weighted_rssi, d.access_load, d.backhaul_load_sum);
            e.score = d.score;
            e.detail = d;
        }
        list.entries.push_back(e);
    }

    std::sort(list.entries.begin(), list.entries.end(),
              [&](const CandidateEntry& x, const CandidateEntry& y) { return precedes(x, y, cfg.tie_break); });
    return list;
}

CandidateList rank_candidates(NodeId sta, const Topology& t, const LoadContext& ctx, const SelectionConfig& cfg)
{
    LoadModel model(t, ctx.links, ctx.traffic, ctx.external, ctx.params);
    return rank_candidates(model, model.assignment(t), model.sta_index(sta), cfg);
}

std::optional<NodeId> best_rssi_target(const LinkBudget& links, NodeId sta, TieBreak tie_break)
{
    std::optional<CandidateEntry> best;
    for (NodeId target : links.in_range_targets(sta)) {
        CandidateEntry e;
        e.target = target;
        e.score = -links.access_rssi(sta, target);
        if (!best || precedes(e, *best, tie_break)) best = e;
    }
    if (!best) return std::nullopt;
    return best->target;
}

std::vector<Move> reassociation_pass(const LoadModel& model, LoadModel::Assignment& assignment,
                                     const SelectionConfig& cfg, const std::set<NodeId>& capable)
{
    std::vector<Move> moves;
    if (cfg.mechanism == Mechanism::RssiBased) return moves;

    for (int pass = 0; pass < cfg.passes; ++pass) {
        const LoadModel::Assignment snapshot = assignment;
        std::size_t moved = 0;
        for (NodeId id : capable) {
            int s = model.sta_index(id);
            int cur = assignment[static_cast<std::size_t>(s)];
            if (cur < 0) continue;
            const auto& view = cfg.refresh == LoadRefresh::FrozenSnapshot ? snapshot : assignment;
            CandidateList list = rank_candidates(model, view, s, cfg);
            if (list.empty()) continue;
            int top = model.target_index(list.entries.front().target);
            if (top == cur) continue;
            moves.push_back(Move{id, model.targets()[static_cast<std::size_t>(cur)], list.entries.front().target});
            assignment[static_cast<std::size_t>(s)] = top;
            ++moved;
        }
        if (moved == 0) break;
    }
    return moves;
}

PassResult reassociation_pass(const Topology& t, const LoadContext& ctx, const SelectionConfig& cfg,
                              const std::set<NodeId>& capable)
{
    PassResult out{t, {}};
    if (cfg.mechanism == Mechanism::RssiBased) return out;
    LoadModel model(t, ctx.links, ctx.traffic, ctx.external, ctx.params);
    auto assignment = model.assignment(t);
    out.moves = reassociation_pass(model, assignment, cfg, capable);
    model.apply(assignment, out.topology);
    return out;
}

std::set<NodeId> sample_capable(const std::vector<NodeId>& stas, double beta_pct, Rng& rng)
{
    auto count = static_cast<std::size_t>(std::llround(beta_pct * static_cast<double>(stas.size()) / 100.0));
    count = std::min(count, stas.size());
    std::vector<NodeId> pool = stas;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace homewifi
