#include "homewifi/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace homewifi {

std::ostream& operator<<(std::ostream& os, NodeId id)
{
    return os << id.value;
}

std::string to_string(Band b)
{
    return b == Band::Band2G4 ? "2.4GHz" : "5GHz";
}

std::string to_string(const ChannelId& c)
{
    return to_string(c.band) + "/" + std::to_string(c.number);
}

std::string to_string(NodeKind k)
{
    switch (k) {
    case NodeKind::AP: return "AP";
    case NodeKind::Extender: return "Extender";
    case NodeKind::STA: return "STA";
    }
    return "?";
}

double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

const RadioConfig& Node::access_radio() const
{
    for (const auto& r : radios)
        if (r.band == Band::Band2G4) return r;
    if (!radios.empty() && kind == NodeKind::STA) return radios.front();
    throw std::logic_error("node " + std::to_string(id.value) + " has no access radio");
}

const RadioConfig& Node::backhaul_radio() const
{
    if (kind == NodeKind::STA)
        throw std::logic_error("STA " + std::to_string(id.value) + " has no backhaul radio");
    for (const auto& r : radios)
        if (r.band == Band::Band5G) return r;
    throw std::logic_error("node " + std::to_string(id.value) + " has no backhaul radio");
}

namespace {

Node make_dual_radio(NodeId id, NodeKind kind, Position pos, ChannelId access_channel)
{
    Node n;
    n.id = id;
    n.kind = kind;
    n.position = pos;
    n.radios.push_back(RadioConfig{Band::Band2G4, access_channel});
    n.radios.push_back(RadioConfig{Band::Band5G, kBackhaulChannel});
    return n;
}

}  // namespace

Node make_ap(Position pos, ChannelId access_channel)
{
    return make_dual_radio(kApId, NodeKind::AP, pos, access_channel);
}

Node make_extender(NodeId id, Position pos, ChannelId access_channel)
{
    return make_dual_radio(id, NodeKind::Extender, pos, access_channel);
}

Node make_sta(NodeId id, Position pos, bool supports_11kv)
{
    Node n;
    n.id = id;
    n.kind = NodeKind::STA;
    n.position = pos;
    // STA radios are fixed to the 2.4 GHz access band.
    n.radios.push_back(RadioConfig{Band::Band2G4, ChannelId{Band::Band2G4, 1}});
    n.supports_11kv = supports_11kv;
    return n;
}

TrafficProfile::TrafficProfile(double per_sta_load_bps, std::size_t n_sta, double packet_length_bits)
    : packet_length_bits_(packet_length_bits),
      per_sta_load_bps_(per_sta_load_bps),
      n_sta_(n_sta),
      total_load_bps_(per_sta_load_bps * static_cast<double>(n_sta))
{
    if (!(packet_length_bits > 0.0)) throw std::invalid_argument("packet length must be positive");
    if (!(per_sta_load_bps >= 0.0)) throw std::invalid_argument("per-STA load must be non-negative");
}

void validate(const ExternalLoad& e)
{
    if (!(e.load_bps >= 0.0)) throw std::invalid_argument("external load must be non-negative");
    if (!(e.phy_rate_bps > 0.0)) throw std::invalid_argument("external PHY rate must be positive");
}

std::string to_string(ViolationKind k)
{
    switch (k) {
    case ViolationKind::MissingAp: return "missing-ap";
    case ViolationKind::ApNotRoot: return "ap-not-root";
    case ViolationKind::DuplicateId: return "duplicate-id";
    case ViolationKind::RadioCount: return "radio-count";
    case ViolationKind::Capability: return "capability";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::ChainTooLong: return "chain-length";
    case ViolationKind::DanglingBackhaul: return "dangling-backhaul";
    case ViolationKind::DanglingAssociation: return "dangling-association";
    case ViolationKind::AssociationKind: return "association-kind";
    }
    return "?";
}

// ---------------------------------------------------------------------------

void Topology::add_node(Node n)
{
    auto id = n.id;
    nodes_.insert_or_assign(id, std::move(n));
}

void Topology::remove_node(NodeId id)
{
    nodes_.erase(id);
}

void Topology::set_backhaul_parent(NodeId extender, NodeId parent)
{
    backhaul_parent_.insert_or_assign(extender, parent);
}

void Topology::associate(NodeId sta, NodeId parent)
{
    auto s = nodes_.find(sta);
    auto p = nodes_.find(parent);
    if (s == nodes_.end()) throw std::out_of_range("unknown STA id " + std::to_string(sta.value));
    if (p == nodes_.end()) throw std::out_of_range("unknown parent id " + std::to_string(parent.value));
    if (s->second.kind != NodeKind::STA || !p->second.is_access_point())
        throw std::invalid_argument("kind mismatch: cannot associate node " + std::to_string(sta.value) +
                                    " (" + to_string(s->second.kind) + ") to node " +
                                    std::to_string(parent.value) + " (" + to_string(p->second.kind) + ")");
    associations_.insert_or_assign(sta, parent);
}

void Topology::disassociate(NodeId sta)
{
    associations_.erase(sta);
}

const Node& Topology::node(NodeId id) const
{
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::out_of_range("unknown node id " + std::to_string(id.value));
    return it->second;
}

std::optional<NodeId> Topology::parent_of(NodeId sta) const
{
    auto it = associations_.find(sta);
    if (it == associations_.end()) return std::nullopt;
    return it->second;
}

std::vector<NodeId> Topology::access_points() const
{
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (n.kind == NodeKind::AP) out.push_back(id);
    for (const auto& [id, n] : nodes_)
        if (n.kind == NodeKind::Extender) out.push_back(id);
    return out;
}

std::vector<NodeId> Topology::extenders() const
{
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (n.kind == NodeKind::Extender) out.push_back(id);
    return out;
}

std::vector<NodeId> Topology::stas() const
{
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (n.kind == NodeKind::STA) out.push_back(id);
    return out;
}

bool operator==(const Topology& a, const Topology& b)
{
    if (a.max_chain_ != b.max_chain_ || a.associations_ != b.associations_ ||
        a.backhaul_parent_ != b.backhaul_parent_ || a.nodes_.size() != b.nodes_.size())
        return false;
    for (auto ia = a.nodes_.begin(), ib = b.nodes_.begin(); ia != a.nodes_.end(); ++ia, ++ib) {
        const Node& x = ia->second;
        const Node& y = ib->second;
        if (x.id != y.id || x.kind != y.kind || !(x.position == y.position) ||
            x.supports_11kv != y.supports_11kv || x.radios.size() != y.radios.size())
            return false;
        for (std::size_t i = 0; i < x.radios.size(); ++i) {
            const auto& r = x.radios[i];
            const auto& s = y.radios[i];
            if (r.band != s.band || r.channel != s.channel || r.tx_power_dbm != s.tx_power_dbm ||
                r.sensitivity_dbm != s.sensitivity_dbm || r.spatial_streams != s.spatial_streams)
                return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate_topology(const Topology& t)
{
    std::vector<Violation> out;
    const auto& nodes = t.nodes();

    auto ap = nodes.find(kApId);
    if (ap == nodes.end()) {
        out.push_back({ViolationKind::MissingAp, kApId, "node 0 is missing"});
    } else if (ap->second.kind != NodeKind::AP) {
        out.push_back({ViolationKind::ApNotRoot, kApId, "node 0 is not an AP"});
    }

    for (const auto& [id, n] : nodes) {
        if (n.id != id) out.push_back({ViolationKind::DuplicateId, id, "node id does not match its key"});
        if (n.kind == NodeKind::AP && id != kApId)
            out.push_back({ViolationKind::ApNotRoot, id, "only node 0 may be an AP"});

        if (n.is_access_point()) {
            bool ok = n.radios.size() == 2 && n.radios[0].band != n.radios[1].band;
            if (!ok) out.push_back({ViolationKind::RadioCount, id, "AP/Extender needs two radios on distinct bands"});
            if (n.supports_11kv)
                out.push_back({ViolationKind::Capability, id, "11k/v capability only applies to STAs"});
        } else if (n.radios.size() != 1) {
            out.push_back({ViolationKind::RadioCount, id, "STA needs exactly one radio"});
        }
        for (const auto& r : n.radios) {
            if (!(r.sensitivity_dbm < r.tx_power_dbm))
                out.push_back({ViolationKind::RadioCount, id, "sensitivity must be below transmit power"});
            if (r.spatial_streams < 1 || r.spatial_streams > 4)
                out.push_back({ViolationKind::RadioCount, id, "spatial streams must be in 1..4"});
        }
    }

    for (const auto& [child, parent] : t.backhaul_parents()) {
        auto c = nodes.find(child);
        auto p = nodes.find(parent);
        if (c == nodes.end() || c->second.kind != NodeKind::Extender ||
            p == nodes.end() || !p->second.is_access_point())
            out.push_back({ViolationKind::DanglingBackhaul, child,
                           "backhaul edge " + std::to_string(child.value) + "->" + std::to_string(parent.value) +
                               " must join an Extender to an AP/Extender"});
    }

    for (const auto& [id, n] : nodes) {
        if (n.kind != NodeKind::Extender) continue;
        if (!t.backhaul_parents().contains(id)) {
            out.push_back({ViolationKind::DanglingBackhaul, id, "Extender has no backhaul parent"});
            continue;
        }
        std::set<NodeId> seen{id};
        NodeId cur = id;
        int extenders_on_path = 1;
        bool reached_root = false;
        while (true) {
            auto up = t.backhaul_parents().find(cur);
            if (up == t.backhaul_parents().end()) break;
            NodeId next = up->second;
            if (next == kApId) {
                reached_root = true;
                break;
            }
            if (!seen.insert(next).second) {
                out.push_back({ViolationKind::Cycle, id, "backhaul cycle through node " + std::to_string(next.value)});
                break;
            }
            auto nn = nodes.find(next);
            if (nn == nodes.end() || nn->second.kind != NodeKind::Extender) break;
            ++extenders_on_path;
            cur = next;
        }
        if (reached_root && extenders_on_path > t.max_chain())
            out.push_back({ViolationKind::ChainTooLong, id,
                           std::to_string(extenders_on_path) + " consecutive Extenders exceeds limit " +
                               std::to_string(t.max_chain())});
    }

    for (const auto& [sta, parent] : t.associations()) {
        auto s = nodes.find(sta);
        auto p = nodes.find(parent);
        if (s == nodes.end() || p == nodes.end()) {
            out.push_back({ViolationKind::DanglingAssociation, sta,
                           "association " + std::to_string(sta.value) + "->" + std::to_string(parent.value) +
                               " references an unknown node"});
        } else if (s->second.kind != NodeKind::STA || !p->second.is_access_point()) {
            out.push_back({ViolationKind::AssociationKind, sta, "association must join an STA to an AP/Extender"});
        }
    }
    return out;
}

std::vector<BackhaulLink> backhaul_path(const Topology& t, NodeId j)
{
    const Node& n = t.node(j);
    if (n.kind == NodeKind::STA)
        throw std::invalid_argument("backhaul_path: node " + std::to_string(j.value) + " is an STA");

    std::vector<BackhaulLink> path;
    NodeId cur = j;
    while (cur != kApId) {
        auto it = t.backhaul_parents().find(cur);
        if (it == t.backhaul_parents().end())
            throw std::invalid_argument("backhaul_path: node " + std::to_string(cur.value) + " has no parent");
        path.push_back({cur, it->second});
        if (path.size() > t.nodes().size())
            throw std::invalid_argument("backhaul_path: cycle above node " + std::to_string(j.value));
        cur = it->second;
    }
    return path;
}

Topology set_association(Topology t, NodeId sta, NodeId parent)
{
    t.associate(sta, parent);
    return t;
}

}  // namespace homewifi
