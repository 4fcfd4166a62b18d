#pragma once

#include "homewifi/model.hpp"

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace homewifi {

/// ITU-R indoor site-general path loss parameters.
struct PropagationParams {
    double distance_power_loss_coeff = 31.0;
    double floor_penetration_db = 0.0;
    double constant_offset_db = -28.0;
    /// Distances below this are clamped; the log-distance law diverges at 0.
    double min_distance_m = 1.0;
    /// Frequencies used for each band, indexed by Band.
    std::array<double, 2> band_frequency_mhz{nominal_frequency_mhz(Band::Band2G4),
                                             nominal_frequency_mhz(Band::Band5G)};

    double frequency_mhz(Band b) const { return band_frequency_mhz[static_cast<std::size_t>(b)]; }
};

void validate(const PropagationParams& p);

double path_loss_db(double f_mhz, double d_m, const PropagationParams& p = {});

double rssi_dbm(const RadioConfig& tx, const Position& tx_pos, const Position& rx_pos,
                const PropagationParams& p = {});

/// Distance at which the received power from `tx` drops to `threshold_dbm`.
double max_range_m(const RadioConfig& tx, double threshold_dbm, const PropagationParams& p = {});

// ---------------------------------------------------------------------------
// MCS tables
// ---------------------------------------------------------------------------

struct McsEntry {
    int mcs = 0;
    double min_rssi_dbm = 0.0;
    double rate_bps_1ss = 0.0;
    double rate_bps_2ss = 0.0;

    /// 3 and 4 streams scale the single-stream rate linearly.
    double rate_bps(int spatial_streams) const;
};

struct McsTable {
    Band band = Band::Band2G4;
    double channel_width_mhz = 20.0;
    std::vector<McsEntry> entries;
};

/// Throws std::invalid_argument unless entries are strictly increasing in threshold and rate.
void validate(const McsTable& t, double sensitivity_floor_dbm = -90.0);

struct McsChoice {
    int mcs = 0;
    double phy_rate_bps = 0.0;
};

/// Highest entry whose threshold is at or below `rssi`; nullopt when below entry 0.
std::optional<McsChoice> mcs_for_rssi(const McsTable& table, double rssi, int spatial_streams);

/// HT 20 MHz, short GI.
McsTable default_mcs_table_2g4();
/// VHT 80 MHz, short GI. -77 dBm lands on MCS 1.
McsTable default_mcs_table_5g();

struct McsTables {
    McsTable band_2g4 = default_mcs_table_2g4();
    McsTable band_5g = default_mcs_table_5g();

    const McsTable& for_band(Band b) const { return b == Band::Band2G4 ? band_2g4 : band_5g; }
};

struct RadioEnvironment {
    PropagationParams propagation{};
    McsTables mcs{};
};

/// PHY rate of a link that is above sensitivity. RSSIs between the sensitivity and the
/// table's first threshold still carry traffic at the MCS 0 rate.
double link_phy_rate_bps(const McsTable& table, double rssi, int spatial_streams);

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Pinned RSSI values keyed by (AP/Extender, peer). Used for measured fixtures
/// where no geometry exists.
using RssiOverrides = std::map<std::pair<NodeId, NodeId>, double>;

/// Precomputed RSSI and rates for every access link (STA, AP/Extender) and
/// every backhaul link of a topology. Links are reciprocal: the RSSI measured
/// by the STA from the AP/Extender is also the uplink RSSI.
class LinkBudget {
public:
    LinkBudget(const Topology& t, const RadioEnvironment& env, const RssiOverrides& overrides = {});

    double access_rssi(NodeId sta, NodeId target) const;
    bool in_range(NodeId sta, NodeId target) const;
    double access_rate_bps(NodeId sta, NodeId target) const;

    double backhaul_rssi(NodeId extender) const;
    double backhaul_rate_bps(NodeId extender) const;

    /// Targets detected by `sta` at or above its sensitivity, AP first then by id.
    std::vector<NodeId> in_range_targets(NodeId sta) const;

private:
    struct Link {
        double rssi = 0.0;
        double rate = 0.0;
        bool usable = false;
    };
    std::map<std::pair<NodeId, NodeId>, Link> access_;
    std::map<NodeId, Link> backhaul_;
    std::vector<NodeId> targets_;
};

}  // namespace homewifi
