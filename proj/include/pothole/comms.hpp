#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pothole/registry.hpp"
#include "pothole/street_network.hpp"

namespace pothole {

struct CommsConfig {
    double p2p_range_m = 20.0;      // warning broadcast radius, closed
    TimeMs loss_timeout_ms = 500;   // silence strictly longer than this drops the link
    TimeMs phase_latency_ms = 100;  // one request/response exchange
    std::size_t transfer_budget = 4; // envelopes per uplink step
};

struct AccessPoint {
    std::string id;
    Point position;
    double range_m = 0.0;
    bool open = true;
};

/// True when `b` hears a single-hop broadcast from `a`.
inline bool within_p2p_range(Point a, Point b, const CommsConfig& cfg = {})
{
    return distance(a, b) <= cfg.p2p_range_m;
}

inline bool ap_covers(const AccessPoint& ap, Point p) { return ap.open && distance(ap.position, p) <= ap.range_m; }

enum class Phase { scanning, associating, authenticating, connected, lost };

inline std::string_view phase_name(Phase p)
{
    switch (p) {
    case Phase::scanning:
        return "SCANNING";
    case Phase::associating:
        return "ASSOCIATING";
    case Phase::authenticating:
        return "AUTHENTICATING";
    case Phase::connected:
        return "CONNECTED";
    case Phase::lost:
        return "LOST";
    }
    return "?";
}

/// Opportunistic AP link. `last_activity_ms` is the time of the last
/// completed exchange (or of entering SCANNING).
struct ConnectionState {
    Phase phase = Phase::scanning;
    TimeMs last_activity_ms = 0;
    std::optional<std::string> peer;

    friend bool operator==(const ConnectionState&, const ConnectionState&) = default;
};

/// Advances the link by at most one transition.
///
/// `visible_ap` is the AP the radio can currently hear: while scanning, the
/// first open AP in range; otherwise the peer if still in range. A phase
/// exchange completes once `phase_latency_ms` has passed since the last one.
/// Silence longer than `loss_timeout_ms` in any non-scanning phase yields
/// LOST, and LOST always steps straight back to SCANNING.
inline ConnectionState step_connection(ConnectionState conn, const std::optional<std::string>& visible_ap, TimeMs now,
                                       const CommsConfig& cfg = {})
{
    if (conn.phase == Phase::lost) {
        return {Phase::scanning, now, std::nullopt};
    }
    if (conn.phase != Phase::scanning && now - conn.last_activity_ms > cfg.loss_timeout_ms) {
        conn.phase = Phase::lost;
        return conn;
    }
    if (!visible_ap) {
        return conn;
    }
    if (conn.phase != Phase::scanning && visible_ap != conn.peer) {
        return conn;
    }
    if (now - conn.last_activity_ms < cfg.phase_latency_ms) {
        return conn;
    }
    switch (conn.phase) {
    case Phase::scanning:
        conn.phase = Phase::associating;
        conn.peer = visible_ap;
        break;
    case Phase::associating:
        conn.phase = Phase::authenticating;
        break;
    case Phase::authenticating:
        conn.phase = Phase::connected;
        break;
    case Phase::connected:
    case Phase::lost:
        break;
    }
    conn.last_activity_ms = now;
    return conn;
}

} // namespace pothole
