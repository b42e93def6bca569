#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pothole/comms.hpp"
#include "pothole/detection.hpp"
#include "pothole/street_network.hpp"

namespace pothole {

struct VehicleSpec {
    std::string id;
    ArcId arc;
    double offset_m = 0.0;
    double speed_mps = 0.0;
    std::vector<NodeId> waypoints;
};

struct PitSpec {
    ArcId arc;
    Pit pit;
};

struct ScriptedEvent {
    enum class Kind { dest_change, detect };

    TimeMs t_ms = 0;
    Kind kind = Kind::dest_change;
    std::string vehicle;
    std::optional<NodeId> dest; // dest_change only; nullopt clears
};

struct Scenario {
    std::uint64_t seed = 0;
    TimeMs duration_ms = 0;
    TimeMs tick_ms = 100;
    double threshold_mm = 10.0;
    double cell_m = 0.5;
    CommsConfig comms;
    std::vector<VehicleSpec> vehicles;
    std::vector<PitSpec> pits;
    std::vector<AccessPoint> access_points;
    std::vector<ScriptedEvent> events;
};

/// Scenario JSON. Top level: `seed`, `duration_ms`, optional `tick_ms`,
/// optional `detection` {threshold_mm, cell_m}, optional `comms`
/// {phase_latency_ms, transfer_budget}, and the arrays `vehicles`, `pits`,
/// `access_points`, `events`. Unknown keys are rejected.
inline Scenario parse_scenario(const std::string& body)
{
    using detail::required;
    using detail::reject_unknown_keys;
    using nlohmann::json;

    auto doc = detail::parse_json(body, "scenario");
    reject_unknown_keys(doc,
                        {"seed", "duration_ms", "tick_ms", "detection", "comms", "vehicles", "pits", "access_points",
                         "events"},
                        "scenario");
    Scenario sc;
    sc.seed = required<std::uint64_t>(doc, "seed", "scenario");
    sc.duration_ms = required<TimeMs>(doc, "duration_ms", "scenario");
    if (doc.contains("tick_ms")) {
        sc.tick_ms = required<TimeMs>(doc, "tick_ms", "scenario");
    }
    if (doc.contains("detection")) {
        const auto& d = doc["detection"];
        reject_unknown_keys(d, {"threshold_mm", "cell_m"}, "scenario.detection");
        if (d.contains("threshold_mm")) {
            sc.threshold_mm = required<double>(d, "threshold_mm", "scenario.detection");
        }
        if (d.contains("cell_m")) {
            sc.cell_m = required<double>(d, "cell_m", "scenario.detection");
        }
    }
    if (doc.contains("comms")) {
        const auto& c = doc["comms"];
        reject_unknown_keys(c, {"phase_latency_ms", "transfer_budget"}, "scenario.comms");
        if (c.contains("phase_latency_ms")) {
            sc.comms.phase_latency_ms = required<TimeMs>(c, "phase_latency_ms", "scenario.comms");
        }
        if (c.contains("transfer_budget")) {
            sc.comms.transfer_budget = required<std::size_t>(c, "transfer_budget", "scenario.comms");
        }
    }

    auto array = [&](const char* key) {
        if (!doc.contains(key)) {
            return json::array();
        }
        const auto& a = doc[key];
        if (!a.is_array()) {
            throw ParseError(std::string("scenario: '") + key + "' must be an array");
        }
        return a;
    };

    auto vehicles = array("vehicles");
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        std::string where = "scenario.vehicles[" + std::to_string(i) + "]";
        const auto& v = vehicles[i];
        reject_unknown_keys(v, {"id", "arc", "offset_m", "speed_mps", "waypoints"}, where);
        VehicleSpec spec{required<std::string>(v, "id", where), required<std::string>(v, "arc", where),
                         required<double>(v, "offset_m", where), required<double>(v, "speed_mps", where), {}};
        if (v.contains("waypoints")) {
            spec.waypoints = required<std::vector<std::string>>(v, "waypoints", where);
        }
        sc.vehicles.push_back(std::move(spec));
    }

    auto pits = array("pits");
    for (std::size_t i = 0; i < pits.size(); ++i) {
        std::string where = "scenario.pits[" + std::to_string(i) + "]";
        const auto& p = pits[i];
        reject_unknown_keys(p, {"arc", "center_m", "half_length_m", "depth_mm", "reflectivity"}, where);
        PitSpec spec{required<std::string>(p, "arc", where),
                     {required<double>(p, "center_m", where), required<double>(p, "half_length_m", where),
                      required<double>(p, "depth_mm", where), 1.0}};
        if (p.contains("reflectivity")) {
            spec.pit.reflectivity = required<double>(p, "reflectivity", where);
        }
        sc.pits.push_back(std::move(spec));
    }

    auto aps = array("access_points");
    for (std::size_t i = 0; i < aps.size(); ++i) {
        std::string where = "scenario.access_points[" + std::to_string(i) + "]";
        const auto& a = aps[i];
        reject_unknown_keys(a, {"id", "x", "y", "range_m", "open"}, where);
        AccessPoint ap{required<std::string>(a, "id", where),
                       {required<double>(a, "x", where), required<double>(a, "y", where)},
                       required<double>(a, "range_m", where),
                       true};
        if (a.contains("open")) {
            ap.open = required<bool>(a, "open", where);
        }
        sc.access_points.push_back(std::move(ap));
    }

    auto events = array("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::string where = "scenario.events[" + std::to_string(i) + "]";
        const auto& e = events[i];
        reject_unknown_keys(e, {"t_ms", "kind", "vehicle", "dest"}, where);
        ScriptedEvent ev;
        ev.t_ms = required<TimeMs>(e, "t_ms", where);
        ev.vehicle = required<std::string>(e, "vehicle", where);
        auto kind = required<std::string>(e, "kind", where);
        if (kind == "DEST_CHANGE") {
            ev.kind = ScriptedEvent::Kind::dest_change;
            if (!e.contains("dest")) {
                throw ParseError(where + ": DEST_CHANGE needs 'dest' (node id or null)");
            }
            if (!e["dest"].is_null()) {
                ev.dest = required<std::string>(e, "dest", where);
            }
        } else if (kind == "DETECT") {
            ev.kind = ScriptedEvent::Kind::detect;
            if (e.contains("dest")) {
                throw ParseError(where + ": DETECT takes no 'dest'");
            }
        } else {
            throw ParseError(where + ": unknown event kind '" + kind + "'");
        }
        sc.events.push_back(std::move(ev));
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(detail::read_file(path)); }

/// Cross-checks a scenario against the network it will run on.
inline void validate_scenario(const Scenario& sc, const StreetNetwork& net)
{
    if (sc.duration_ms < 0) {
        throw ValidationError("scenario duration is negative");
    }
    if (sc.tick_ms <= 0) {
        throw ValidationError("tick_ms must be positive");
    }
    if (!(sc.threshold_mm > 0.0) || !(sc.cell_m > 0.0)) {
        throw ValidationError("detection threshold and cell size must be positive");
    }
    if (sc.comms.phase_latency_ms < 0 || sc.comms.transfer_budget == 0) {
        throw ValidationError("comms phase latency must be >= 0 and transfer budget > 0");
    }
    std::set<std::string> vehicle_ids;
    for (const auto& v : sc.vehicles) {
        if (!text::valid_id(v.id) || !vehicle_ids.insert(v.id).second) {
            throw ValidationError("invalid or duplicate vehicle id '" + v.id + "'");
        }
        if (!net.has_arc(v.arc)) {
            throw ValidationError("vehicle " + v.id + " starts on unknown arc " + v.arc);
        }
        if (!(v.offset_m >= 0.0 && v.offset_m <= net.arc(v.arc).length_m)) {
            throw ValidationError("vehicle " + v.id + " starts outside its arc");
        }
        if (!(v.speed_mps >= 0.0) || !std::isfinite(v.speed_mps)) {
            throw ValidationError("vehicle " + v.id + " has invalid speed");
        }
        for (const auto& w : v.waypoints) {
            if (!net.has_node(w)) {
                throw ValidationError("vehicle " + v.id + " waypoint " + w + " is not a node");
            }
        }
    }
    for (const auto& p : sc.pits) {
        if (!net.has_arc(p.arc)) {
            throw ValidationError("pit on unknown arc " + p.arc);
        }
        GroundTruthSurface{p.arc, net.arc(p.arc).length_m, {p.pit}}.validate();
    }
    std::set<std::string> ap_ids;
    for (const auto& ap : sc.access_points) {
        if (!text::valid_id(ap.id) || !ap_ids.insert(ap.id).second) {
            throw ValidationError("invalid or duplicate access point id '" + ap.id + "'");
        }
        if (!(ap.range_m > 0.0)) {
            throw ValidationError("access point " + ap.id + " needs a positive range");
        }
    }
    for (const auto& e : sc.events) {
        if (e.t_ms < 0 || e.t_ms > sc.duration_ms) {
            throw ValidationError("scripted event at " + std::to_string(e.t_ms) + " ms outside scenario duration");
        }
        if (!vehicle_ids.contains(e.vehicle)) {
            throw ValidationError("scripted event for unknown vehicle " + e.vehicle);
        }
        if (e.dest && !net.has_node(*e.dest)) {
            throw ValidationError("scripted destination " + *e.dest + " is not a node");
        }
    }
}

} // namespace pothole
