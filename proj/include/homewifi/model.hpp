#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace homewifi {

// ---------------------------------------------------------------------------
// Identifiers and radio description
// ---------------------------------------------------------------------------

struct NodeId {
    std::uint32_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// Node 0 is always the gateway AP.
inline constexpr NodeId kApId{0};

std::ostream& operator<<(std::ostream& os, NodeId id);

enum class Band { Band2G4, Band5G };

constexpr double nominal_frequency_mhz(Band b)
{
    return b == Band::Band2G4 ? 2400.0 : 5000.0;
}

std::string to_string(Band b);

struct ChannelId {
    Band band = Band::Band2G4;
    int number = 1;

    friend constexpr auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

std::string to_string(const ChannelId& c);

inline constexpr ChannelId kBackhaulChannel{Band::Band5G, 36};

struct RadioConfig {
    Band band = Band::Band2G4;
    ChannelId channel{};
    double tx_power_dbm = 20.0;
    double sensitivity_dbm = -90.0;
    int spatial_streams = 2;
};

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

enum class NodeKind { AP, Extender, STA };

std::string to_string(NodeKind k);

struct Node {
    NodeId id{};
    NodeKind kind = NodeKind::STA;
    Position position{};
    std::vector<RadioConfig> radios;
    bool supports_11kv = false;

    bool is_access_point() const { return kind != NodeKind::STA; }

    /// The 2.4 GHz radio STAs associate with (or the STA's only radio).
    const RadioConfig& access_radio() const;
    /// The 5 GHz radio of an AP/Extender. Throws for STAs.
    const RadioConfig& backhaul_radio() const;
};

Node make_ap(Position pos, ChannelId access_channel);
Node make_extender(NodeId id, Position pos, ChannelId access_channel);
Node make_sta(NodeId id, Position pos, bool supports_11kv = true);

// ---------------------------------------------------------------------------
// Traffic
// ---------------------------------------------------------------------------

class TrafficProfile {
public:
    TrafficProfile(double per_sta_load_bps, std::size_t n_sta, double packet_length_bits = 12000.0);

    double packet_length_bits() const { return packet_length_bits_; }
    double per_sta_load_bps() const { return per_sta_load_bps_; }
    double total_load_bps() const { return total_load_bps_; }
    std::size_t n_sta() const { return n_sta_; }

private:
    double packet_length_bits_;
    double per_sta_load_bps_;
    std::size_t n_sta_;
    double total_load_bps_;
};

struct ExternalLoad {
    ChannelId channel{};
    double load_bps = 0.0;
    double phy_rate_bps = 65e6;
};

void validate(const ExternalLoad& e);

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

struct BackhaulLink {
    NodeId child{};
    NodeId parent{};

    friend constexpr bool operator==(const BackhaulLink&, const BackhaulLink&) = default;
};

enum class ViolationKind {
    MissingAp,
    ApNotRoot,
    DuplicateId,
    RadioCount,
    Capability,
    Cycle,
    ChainTooLong,
    DanglingBackhaul,
    DanglingAssociation,
    AssociationKind,
};

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    NodeId node;
    std::string detail;
};

class Topology {
public:
    explicit Topology(int max_chain = 2) : max_chain_(max_chain) {}

    /// Inserts or replaces a node. Does not validate; see validate_topology.
    void add_node(Node n);
    /// Drops the node only; associations and backhaul links naming it are kept
    /// so validate_topology can report them.
    void remove_node(NodeId id);
    void set_backhaul_parent(NodeId extender, NodeId parent);
    void associate(NodeId sta, NodeId parent);
    void disassociate(NodeId sta);

    bool contains(NodeId id) const { return nodes_.contains(id); }
    const Node& node(NodeId id) const;
    const std::map<NodeId, Node>& nodes() const { return nodes_; }
    const std::map<NodeId, NodeId>& associations() const { return associations_; }
    const std::map<NodeId, NodeId>& backhaul_parents() const { return backhaul_parent_; }
    int max_chain() const { return max_chain_; }

    std::optional<NodeId> parent_of(NodeId sta) const;
    /// AP first, then Extenders by id.
    std::vector<NodeId> access_points() const;
    std::vector<NodeId> extenders() const;
    std::vector<NodeId> stas() const;

    friend bool operator==(const Topology&, const Topology&);

private:
    std::map<NodeId, Node> nodes_;
    std::map<NodeId, NodeId> associations_;
    std::map<NodeId, NodeId> backhaul_parent_;
    int max_chain_;
};

std::vector<Violation> validate_topology(const Topology& t);

/// Backhaul links from `j` up to the AP, nearest first. Empty for the AP.
std::vector<BackhaulLink> backhaul_path(const Topology& t, NodeId j);

/// Returns a copy of `t` with `sta` associated to `parent`.
Topology set_association(Topology t, NodeId sta, NodeId parent);

}  // namespace homewifi
