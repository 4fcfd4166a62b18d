#pragma once

#include "homewifi/model.hpp"
#include "homewifi/perf.hpp"
#include "homewifi/radio.hpp"
#include "homewifi/rng.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace homewifi {

enum class Mechanism { RssiBased, LoadAware };

std::string to_string(Mechanism m);
Mechanism parse_mechanism(const std::string& s);

/// Ordering among candidates with equal score (or equal RSSI).
enum class TieBreak {
    ApFirstThenLowestId,
    LowestId,
};

/// Whether the candidate STA's own traffic is counted in the loads it is scored against.
enum class SelfLoad {
    /// Every candidate is scored as if the STA were already attached to it.
    Include,
    /// The STA's traffic is removed from the network before scoring.
    Exclude,
};

enum class LoadRefresh {
    AfterEachMove,
    FrozenSnapshot,
};

struct SelectionConfig {
    Mechanism mechanism = Mechanism::LoadAware;
    double alpha = 0.5;
    double beta_pct = 100.0;
    TieBreak tie_break = TieBreak::ApFirstThenLowestId;
    int passes = 1;
    SelfLoad self_load = SelfLoad::Include;
    LoadRefresh refresh = LoadRefresh::AfterEachMove;
};

void validate(const SelectionConfig& cfg);

/// Inverse RSSI weighting: 0 at the transmit power, 1 at the sensitivity level.
/// `rssi` is clamped into [s, p_t] first.
double weighted_rssi(double rssi, double p_t, double s);

/// Busy fraction per channel.
using LoadMap = std::map<ChannelId, double>;

struct CandidateScore {
    NodeId sta{};
    NodeId target{};
    double rssi_dbm = 0.0;
    double weighted_rssi = 0.0;
    double access_load = 0.0;
    double backhaul_load_sum = 0.0;
    double score = 0.0;
};

/// alpha * (weighted_rssi + access_load) + (1 - alpha) * backhaul_load_sum
double compose_score(double alpha, double weighted_rssi, double access_load, double backhaul_load_sum);

/// Scores `target` for `sta` against measured loads. Throws if `target` is below the STA's sensitivity.
CandidateScore score(const Topology& t, const LinkBudget& links, NodeId sta, NodeId target, const LoadMap& loads,
                     const SelectionConfig& cfg);

struct CandidateEntry {
    NodeId target{};
    ChannelId channel{};
    /// Ascending sort key: Y for LoadAware, -RSSI for RssiBased.
    double score = 0.0;
    std::optional<CandidateScore> detail;
};

struct CandidateList {
    NodeId sta{};
    std::vector<CandidateEntry> entries;

    bool empty() const { return entries.empty(); }
};

/// Everything needed to turn an association map into channel loads.
struct LoadContext {
    const LinkBudget& links;
    const TrafficProfile& traffic;
    const std::vector<ExternalLoad>& external;
    const PerfParams& params;
};

/// Busy fraction of every channel carrying traffic in `t`.
LoadMap measure_loads(const Topology& t, const LoadContext& ctx);

/// In-range targets of `sta` ranked best first. Empty when nothing is in range.
CandidateList rank_candidates(NodeId sta, const Topology& t, const LoadContext& ctx, const SelectionConfig& cfg);

/// Same ranking on a prebuilt LoadModel and assignment.
CandidateList rank_candidates(const LoadModel& model, const LoadModel::Assignment& assignment, int sta,
                              const SelectionConfig& cfg);

/// Strongest in-range target for `sta`, ties per `tie_break`.
std::optional<NodeId> best_rssi_target(const LinkBudget& links, NodeId sta,
                                       TieBreak tie_break = TieBreak::ApFirstThenLowestId);

struct Move {
    NodeId sta{};
    NodeId from{};
    NodeId to{};

    friend bool operator==(const Move&, const Move&) = default;
};

struct PassResult {
    Topology topology;
    std::vector<Move> moves;
};

/// Load-balancing pass over the 802.11k/v capable STAs in ascending id order.
/// Each STA is moved to the head of its candidate list when that differs from
/// its current parent. RssiBased configs return the input unchanged.
PassResult reassociation_pass(const Topology& t, const LoadContext& ctx, const SelectionConfig& cfg,
                              const std::set<NodeId>& capable);

/// Assignment-level form used by the runner; `assignment` is updated in place.
std::vector<Move> reassociation_pass(const LoadModel& model, LoadModel::Assignment& assignment,
                                     const SelectionConfig& cfg, const std::set<NodeId>& capable);

/// round(beta_pct * N / 100) STAs drawn without replacement.
std::set<NodeId> sample_capable(const std::vector<NodeId>& stas, double beta_pct, Rng& rng);

}  // namespace homewifi
