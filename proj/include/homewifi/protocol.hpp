#pragma once

#include "homewifi/model.hpp"
#include "homewifi/selection.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace homewifi {

// Simulated 802.11k/v exchange. Frames are structured records; nothing here
// is octet-encoded.

enum class MeasurementMode { ActiveScan, PassiveScan, BeaconTable };

std::string to_string(MeasurementMode m);

struct BeaconRequest {
    MeasurementMode mode = MeasurementMode::ActiveScan;
    std::vector<ChannelId> channels;
};

struct BeaconReportEntry {
    NodeId bssid{};
    Band frequency = Band::Band2G4;
    ChannelId channel{};
    double rssi_dbm = 0.0;
};

struct BeaconReport {
    std::vector<BeaconReportEntry> entries;
};

struct ChannelLoadRequest {
    ChannelId channel{};
};

struct ChannelLoadReport {
    ChannelId channel{};
    double busy_fraction = 0.0;
    double measurement_duration_ms = 0.0;
};

struct BtmQuery {};

struct BtmRequest {
    CandidateList candidates;
};

struct BtmResponse {
    bool accept = true;
};

struct AssocRequest {
    NodeId sta{};
    NodeId target{};
    bool reassociation = false;
};

struct AssocResponse {
    bool accepted = true;
    bool supports_11kv_echo = false;
};

/// Extender -> AP notice that an STA (re)associated.
struct AssocNotify {
    NodeId sta{};
    NodeId parent{};
    bool supports_11kv = false;
};

/// Controller-side record that a capable STA got no BSS transition request.
struct DecisionSkipped {
    NodeId sta{};
    std::string reason;
};

using Frame = std::variant<BeaconRequest, BeaconReport, ChannelLoadRequest, ChannelLoadReport, BtmQuery, BtmRequest,
                           BtmResponse, AssocRequest, AssocResponse, AssocNotify, DecisionSkipped>;

std::string frame_type(const Frame& f);

struct Event {
    std::size_t step = 0;
    NodeId src{};
    NodeId dst{};
    Frame frame;
};

class EventLog {
public:
    void push(NodeId src, NodeId dst, Frame f);
    void append(const EventLog& other);

    const std::vector<Event>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    /// One JSON object per line: step, src, dst, type, then the frame's fields.
    void write_jsonl(std::ostream& os) const;

private:
    std::vector<Event> events_;
};

/// Count of 802.11k (beacon / channel load) and 802.11v (BTM) frames.
std::size_t count_kv_frames(const EventLog& log);

/// Checks that, for every STA, its frames follow association -> beacon request ->
/// beacon report -> BTM request -> BTM response -> reassociation. Returns the
/// offending STA ids.
std::vector<NodeId> stage_order_violations(const EventLog& log);

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

struct StageResult {
    Topology topology;
    EventLog log;
};

/// Stage 1: every STA associates to its strongest in-range AP/Extender.
StageResult stage1_initial_association(Topology t, const LinkBudget& links,
                                       TieBreak tie_break = TieBreak::ApFirstThenLowestId);

struct Collection {
    std::map<NodeId, BeaconReport> beacon_reports;
    /// Keyed by (reporting node, channel). Extenders report their access and backhaul channels.
    std::map<std::pair<NodeId, ChannelId>, ChannelLoadReport> load_reports;
    EventLog log;
};

/// Stage 2: beacon request/report with each capable STA in `stas`, then a
/// channel load request/report round with the AP and every Extender.
Collection stage2_collect(const Topology& t, const LoadContext& ctx, MeasurementMode mode,
                          const std::set<NodeId>& stas, double measurement_duration_ms = 50.0);

struct Decision {
    std::map<NodeId, BtmRequest> requests;
    EventLog log;
};

/// Stage 3: candidate list per reporting STA wrapped in a BSS transition request.
Decision stage3_decide(const Topology& t, const LoadContext& ctx, const Collection& reports,
                       const SelectionConfig& cfg);

struct ReassociationResult {
    Topology topology;
    EventLog log;
    std::vector<Move> moves;
};

/// Stage 4: each STA accepts and tries its candidates in order, stopping at the
/// first one it can hear (its current parent counts as a success with no move).
ReassociationResult stage4_reassociate(Topology t, const LinkBudget& links,
                                       const std::map<NodeId, BtmRequest>& requests);

struct ProtocolRun {
    Topology topology;
    EventLog log;
    std::vector<Move> moves;
};

/// Stages 2-4 after initial association. With LoadRefresh::AfterEachMove the
/// exchange runs STA by STA so loads are re-measured after each move; a frozen
/// snapshot collects once for every capable STA.
ProtocolRun run_load_balancing(Topology associated, const LoadContext& ctx, const SelectionConfig& cfg,
                               const std::set<NodeId>& capable, MeasurementMode mode = MeasurementMode::ActiveScan);

/// Stage 1 followed by run_load_balancing (LoadAware only).
ProtocolRun run_protocol(Topology unassociated, const LoadContext& ctx, const SelectionConfig& cfg,
                         const std::set<NodeId>& capable, MeasurementMode mode = MeasurementMode::ActiveScan);

}  // namespace homewifi
