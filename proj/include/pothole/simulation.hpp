#pragma once

// Discrete-event world: vehicles drive routes, scan arcs, warn neighbours
// over single-hop P2P, and uplink sealed reports through opportunistic
// access points to the server. Everything runs on one event loop ordered by
// (timestamp, insertion sequence), so a seed fixes the whole trace.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pothole/comms.hpp"
#include "pothole/detection.hpp"
#include "pothole/geocrypto.hpp"
#include "pothole/maintenance.hpp"
#include "pothole/routing.hpp"
#include "pothole/scenario.hpp"
#include "pothole/server.hpp"

namespace pothole {

enum class EventKind { move, detect, p2p_broadcast, phase_timeout, uplink, dest_change };

struct SimEvent {
    TimeMs t_ms = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::move;
    std::size_t vehicle = 0;
    std::optional<NodeId> dest;
    bool itinerary = false; // dest_change raised by the waypoint list rather than a script

    bool operator>(const SimEvent& o) const { return t_ms != o.t_ms ? t_ms > o.t_ms : seq > o.seq; }
};

struct QueuedEnvelope {
    std::uint64_t serial = 0;
    ReportEnvelope envelope;
    Location claimed;
};

struct VehicleState {
    std::string id;
    StreetNetwork::Index arc = 0;
    double offset_m = 0.0;
    double speed_mps = 0.0;
    bool parked = false;
    double sweep_from_m = 0.0;
    RoutingSession session = RoutingSession::on_arc({});
    std::deque<NodeId> waypoints;
    std::deque<QueuedEnvelope> pending;
    std::set<std::pair<ArcId, double>> warnings;
    ConnectionState conn;
    std::optional<TimeMs> timeout_check_at;
    std::vector<std::string> route_log;
};

class World {
public:
    World(std::shared_ptr<const StreetNetwork> net, Scenario scenario)
        : net_(std::move(net)), sc_(std::move(scenario)), rng_(sc_.seed), key_(draw_key(rng_)),
          server_(net_, key_, ServerConfig{sc_.threshold_mm, {}})
    {
        validate_scenario(sc_, *net_);
        for (const auto& p : sc_.pits) {
            auto idx = net_->arc_index(p.arc);
            auto& surface = surfaces_[idx];
            surface.arc = p.arc;
            surface.arc_length_m = net_->arcs()[idx].length_m;
            surface.pits.push_back(p.pit);
        }
        for (const auto& spec : sc_.vehicles) {
            VehicleState v;
            v.id = spec.id;
            v.arc = net_->arc_index(spec.arc);
            v.offset_m = spec.offset_m;
            v.sweep_from_m = spec.offset_m;
            v.speed_mps = spec.speed_mps;
            v.session = RoutingSession::on_arc(spec.arc);
            v.waypoints.assign(spec.waypoints.begin(), spec.waypoints.end());
            v.conn = {Phase::scanning, 0, std::nullopt};
            vehicles_.push_back(std::move(v));
        }
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            if (!vehicles_[i].waypoints.empty()) {
                schedule({0, 0, EventKind::dest_change, i, vehicles_[i].waypoints.front(), true});
            }
        }
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            schedule({sc_.tick_ms, 0, EventKind::move, i, std::nullopt, false});
        }
        for (const auto& e : sc_.events) {
            auto kind = e.kind == ScriptedEvent::Kind::detect ? EventKind::detect : EventKind::dest_change;
            schedule({e.t_ms, 0, kind, vehicle_index(e.vehicle), e.dest, false});
        }
    }

    /// Processes every event with timestamp < duration.
    void run()
    {
        while (!queue_.empty() && queue_.top().t_ms < sc_.duration_ms) {
            auto ev = queue_.top();
            queue_.pop();
            now_ = ev.t_ms;
            dispatch(ev);
        }
        now_ = sc_.duration_ms;
    }

    /// Single-hop warning from `sender` to every other vehicle within the P2P
    /// range. Receivers cache the warning and do not forward it.
    std::vector<std::string> p2p_broadcast(std::size_t sender, const DetectionReport& report, TimeMs now)
    {
        auto& from = vehicles_.at(sender);
        Point origin = position(from);
        std::vector<std::string> receivers;
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            if (i == sender || !within_p2p_range(origin, position(vehicles_[i]), sc_.comms)) {
                continue;
            }
            vehicles_[i].warnings.insert({report.location.arc, report.location.offset_m});
            receivers.push_back(vehicles_[i].id);
        }
        trace(now, "P2P_BROADCAST", "vehicle=" + from.id + " arc=" + report.location.arc +
                                        " offset=" + text::number(report.location.offset_m) +
                                        " receivers=" + (receivers.empty() ? "-" : text::join(receivers, ",")));
        return receivers;
    }

    /// Hands up to the transfer budget of queued envelopes to the server.
    /// Requires a CONNECTED link whose AP is still in range; otherwise 0.
    std::size_t uplink(std::size_t vehicle, TimeMs now)
    {
        auto& v = vehicles_.at(vehicle);
        if (v.conn.phase != Phase::connected || visible_ap(v) != v.conn.peer) {
            return 0;
        }
        std::size_t sent = 0;
        while (sent < sc_.comms.transfer_budget && !v.pending.empty()) {
            auto item = std::move(v.pending.front());
            v.pending.pop_front();
            auto outcome = server_.receive_envelope(item.envelope, item.claimed, now);
            std::string result = outcome ? ((outcome->is_new ? "new pothole=" : "dup pothole=") + outcome->id.str())
                                         : std::string("dropped");
            trace(now, "UPLINK", "vehicle=" + v.id + " ap=" + *v.conn.peer + " envelope=" +
                                     std::to_string(item.serial) + " phase=" + std::string(phase_name(v.conn.phase)) +
                                     " " + result);
            ++sent;
        }
        if (sent > 0) {
            v.conn.last_activity_ms = now;
            arm_timeout(vehicle);
        }
        return sent;
    }

    /// One link-lifecycle step for a vehicle at `now`.
    void step_link(std::size_t vehicle, TimeMs now)
    {
        auto& v = vehicles_.at(vehicle);
        auto before = v.conn;
        v.conn = step_connection(v.conn, visible_ap(v), now, sc_.comms);
        after_link_change(vehicle, before, now);
    }

    /// Seals a report and queues it for uplink.
    void enqueue_report(std::size_t vehicle, const PlainReport& report)
    {
        auto& v = vehicles_.at(vehicle);
        v.pending.push_back({next_serial_++, encrypt(report, key_, rng_), report.location});
    }

    Point position(const VehicleState& v) const { return net_->position(v.arc, v.offset_m); }

    std::size_t vehicle_index(const std::string& id) const
    {
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            if (vehicles_[i].id == id) {
                return i;
            }
        }
        throw NotFound("unknown vehicle " + id);
    }

    VehicleState& vehicle(std::size_t i) { return vehicles_.at(i); }
    const std::vector<VehicleState>& vehicles() const { return vehicles_; }
    Server& server() { return server_; }
    const Server& server() const { return server_; }
    const Scenario& scenario() const { return sc_; }
    const StreetNetwork& network() const { return *net_; }
    TimeMs now() const { return now_; }

    const std::vector<std::string>& trace_lines() const { return trace_; }

    std::string trace_text() const
    {
        std::string out;
        for (const auto& l : trace_) {
            out += l + "\n";
        }
        return out;
    }

    /// Writes trace.txt, routes_<vehicle>.txt, registry.csv, events.csv,
    /// weighted_network.csv and maintenance.csv (evaluated at the end time).
    void write_outputs(const std::filesystem::path& dir) const
    {
        std::filesystem::create_directories(dir);
        auto put = [&](const std::string& name, const std::string& body) {
            std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("cannot write " + (dir / name).string());
            }
            out << body;
        };
        put("trace.txt", trace_text());
        for (const auto& v : vehicles_) {
            std::string body;
            for (const auto& l : v.route_log) {
                body += l + "\n";
            }
            put("routes_" + v.id + ".txt", body);
        }
        put("registry.csv", server_.registry().to_csv());
        put("events.csv", events_to_csv(server_.registry().events()));
        put("weighted_network.csv", server_.weighted().to_csv());
        put("maintenance.csv", priority_report_to_csv(priority_report(server_.registry(), now_)));
    }

private:
    static SharedKey draw_key(std::mt19937_64& rng)
    {
        SharedKey key{};
        for (std::size_t i = 0; i < key.size(); i += 8) {
            auto word = rng();
            for (std::size_t b = 0; b < 8; ++b) {
                key[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
            }
        }
        return key;
    }

    void schedule(SimEvent ev)
    {
        ev.seq = next_seq_++;
        queue_.push(std::move(ev));
    }

    void trace(TimeMs t, std::string_view kind, const std::string& details)
    {
        trace_.push_back("t=" + std::to_string(t) + " " + std::string(kind) + " " + details);
    }

    void dispatch(const SimEvent& ev)
    {
        switch (ev.kind) {
        case EventKind::move:
            on_move(ev.vehicle);
            break;
        case EventKind::dest_change:
            on_dest_change(ev.vehicle, ev.dest, ev.itinerary);
            break;
        case EventKind::detect:
            on_detect(ev.vehicle);
            break;
        case EventKind::phase_timeout:
            on_phase_timeout(ev.vehicle);
            break;
        case EventKind::p2p_broadcast:
        case EventKind::uplink:
            break; // performed inline by the move handler
        }
    }

    std::optional<std::string> visible_ap(const VehicleState& v) const
    {
        Point p = position(v);
        if (v.conn.phase == Phase::scanning || v.conn.phase == Phase::lost) {
            const AccessPoint* best = nullptr;
            double best_d = 0.0;
            for (const auto& ap : sc_.access_points) {
                if (!ap_covers(ap, p)) {
                    continue;
                }
                double d = distance(ap.position, p);
                if (best == nullptr || d < best_d || (d == best_d && ap.id < best->id)) {
                    best = &ap;
                    best_d = d;
                }
            }
            return best ? std::optional<std::string>(best->id) : std::nullopt;
        }
        for (const auto& ap : sc_.access_points) {
            if (v.conn.peer && ap.id == *v.conn.peer) {
                return ap_covers(ap, p) ? std::optional<std::string>(ap.id) : std::nullopt;
            }
        }
        return std::nullopt;
    }

    void after_link_change(std::size_t vehicle, const ConnectionState& before, TimeMs now)
    {
        auto& v = vehicles_[vehicle];
        if (v.conn.phase == before.phase) {
            if (v.conn.last_activity_ms != before.last_activity_ms) {
                arm_timeout(vehicle);
            }
            return;
        }
        std::string ap = v.conn.peer ? *v.conn.peer : (before.peer ? *before.peer : "-");
        if (v.conn.phase == Phase::lost) {
            trace(now, "PHASE_TIMEOUT", "vehicle=" + v.id + " ap=" + ap + " from=" +
                                            std::string(phase_name(before.phase)) +
                                            " silence=" + std::to_string(now - before.last_activity_ms));
            auto lost = v.conn;
            v.conn = step_connection(lost, std::nullopt, now, sc_.comms);
            trace(now, "PHASE", "vehicle=" + v.id + " ap=" + ap + " from=LOST to=SCANNING");
            return;
        }
        trace(now, "PHASE", "vehicle=" + v.id + " ap=" + ap + " from=" + std::string(phase_name(before.phase)) +
                                " to=" + std::string(phase_name(v.conn.phase)));
        arm_timeout(vehicle);
    }

    /// Keeps one pending silence check per vehicle, due one millisecond after
    /// the loss timeout would elapse.
    void arm_timeout(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        if (v.conn.phase == Phase::scanning || v.conn.phase == Phase::lost || v.timeout_check_at) {
            return;
        }
        TimeMs due = v.conn.last_activity_ms + sc_.comms.loss_timeout_ms + 1;
        v.timeout_check_at = due;
        schedule({due, 0, EventKind::phase_timeout, vehicle, std::nullopt, false});
    }

    void on_phase_timeout(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        v.timeout_check_at.reset();
        if (v.conn.phase == Phase::scanning || v.conn.phase == Phase::lost) {
            return;
        }
        auto before = v.conn;
        v.conn = step_connection(v.conn, std::nullopt, now_, sc_.comms);
        if (v.conn.phase == Phase::lost) {
            after_link_change(vehicle, before, now_);
        } else {
            v.conn = before; // only the silence check runs here, not a phase exchange
            arm_timeout(vehicle);
        }
    }

    void on_move(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        if (!v.parked && v.speed_mps > 0.0) {
            advance(vehicle, v.speed_mps * static_cast<double>(sc_.tick_ms) / 1000.0);
        }
        step_link(vehicle, now_);
        uplink(vehicle, now_);
        schedule({now_ + sc_.tick_ms, 0, EventKind::move, vehicle, std::nullopt, false});
    }

    void advance(std::size_t vehicle, double distance_m)
    {
        auto& v = vehicles_[vehicle];
        double remaining = distance_m;
        while (!v.parked) {
            double length = net_->arcs()[v.arc].length_m;
            double room = length - v.offset_m;
            if (remaining < room) {
                v.offset_m += remaining;
                return;
            }
            remaining -= room;
            v.offset_m = length;
            arrive_at_head(vehicle);
            if (remaining <= 0.0) {
                return;
            }
        }
    }

    void arrive_at_head(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        const auto& arc = net_->arcs()[v.arc];
        scan(vehicle, v.sweep_from_m, arc.length_m);
        v.sweep_from_m = arc.length_m;

        bool was_navigating = v.session.navigating();
        v.session.reach_node(arc.head);
        if (was_navigating && !v.session.navigating()) {
            v.route_log.push_back("REACHED t=" + std::to_string(now_) + " node=" + arc.head);
            if (!v.waypoints.empty()) {
                v.waypoints.pop_front();
            }
            set_next_waypoint(vehicle);
        }
        take_next_arc(vehicle);
    }

    /// Routes to the front waypoint. Unreachable waypoints are dropped and
    /// waypoints the vehicle already stands on count as reached. With none
    /// left the session falls back to weight display.
    void set_next_waypoint(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        while (!v.waypoints.empty()) {
            if (change_destination(vehicle, v.waypoints.front())) {
                if (v.session.navigating()) {
                    return;
                }
                v.route_log.push_back("REACHED t=" + std::to_string(now_) + " node=" + v.waypoints.front());
            }
            v.waypoints.pop_front();
        }
        if (v.session.navigating()) {
            change_destination(vehicle, std::nullopt);
        }
    }

    /// Applies a destination change and logs it. False if unreachable.
    bool change_destination(std::size_t vehicle, const std::optional<NodeId>& dest)
    {
        auto& v = vehicles_[vehicle];
        const auto& wnet = server_.weighted();
        NodeId anchor = v.session.anchor(*net_);
        std::string target = dest ? *dest : "none";
        SessionOutput out;
        try {
            out = v.session.modify_destination(wnet, dest);
        } catch (const Unreachable&) {
            trace(now_, "DEST_CHANGE", "vehicle=" + v.id + " dest=" + target + " anchor=" + anchor + " unreachable");
            v.route_log.push_back("UNREACHABLE t=" + std::to_string(now_) + " from=" + anchor + " dest=" + target);
            return false;
        }
        if (const auto* r = std::get_if<Route>(&out)) {
            trace(now_, "DEST_CHANGE", "vehicle=" + v.id + " dest=" + target + " anchor=" + anchor +
                                           " arcs=" + std::to_string(r->arcs.size()) +
                                           " weight=" + text::number(r->total_weight) +
                                           " length=" + text::number(r->total_length_m));
            v.route_log.push_back("ROUTE t=" + std::to_string(now_) + " from=" + anchor + " dest=" + target);
            std::string body = format_route_trace(wnet, *r);
            body.pop_back();
            v.route_log.push_back(body);
        } else {
            trace(now_, "DEST_CHANGE", "vehicle=" + v.id + " dest=" + target + " anchor=" + anchor);
            log_display(v, out);
        }
        return true;
    }

    void log_display(VehicleState& v, const SessionOutput& out)
    {
        if (const auto* reading = std::get_if<ArcWeightReading>(&out)) {
            v.route_log.push_back("DISPLAY t=" + std::to_string(now_) + " arc=" + reading->arc +
                                  " weight=" + text::number(reading->weight));
        }
    }

    /// At a node: enter the next route arc, or park.
    void take_next_arc(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        auto next = v.session.next_arc();
        if (!next) {
            if (!v.parked) {
                v.parked = true;
                trace(now_, "MOVE", "vehicle=" + v.id + " park node=" + net_->arcs()[v.arc].head);
                log_display(v, v.session.display(server_.weighted()));
            }
            return;
        }
        v.parked = false;
        v.arc = net_->arc_index(*next);
        v.offset_m = 0.0;
        v.sweep_from_m = 0.0;
        v.session.enter_arc(*next);
        trace(now_, "MOVE", "vehicle=" + v.id + " enter=" + *next + " from=" + net_->arcs()[v.arc].tail);
    }

    void on_dest_change(std::size_t vehicle, const std::optional<NodeId>& dest, bool itinerary)
    {
        auto& v = vehicles_[vehicle];
        if (!itinerary) {
            v.waypoints.clear();
            if (dest) {
                v.waypoints.push_back(*dest);
            }
        }
        if (!dest && v.session.navigating()) {
            change_destination(vehicle, std::nullopt);
        } else {
            set_next_waypoint(vehicle);
        }
        if (v.parked) {
            take_next_arc(vehicle);
        }
    }

    void on_detect(std::size_t vehicle)
    {
        auto& v = vehicles_[vehicle];
        if (v.offset_m > v.sweep_from_m) {
            scan(vehicle, v.sweep_from_m, v.offset_m);
            v.sweep_from_m = v.offset_m;
        }
    }

    /// Sweeps [from, to] of the current arc, then per supra-threshold run:
    /// trace, warn neighbours, seal the cropped scan for uplink.
    void scan(std::size_t vehicle, double from, double to)
    {
        auto& v = vehicles_[vehicle];
        auto it = surfaces_.find(v.arc);
        if (it == surfaces_.end() || !(from < to)) {
            return;
        }
        auto result = sweep(it->second, from, to, {sc_.cell_m, 1});
        Location origin{it->second.arc, from};
        for (const auto& run : extract_runs(result.depth, result.intensity, sc_.threshold_mm, origin)) {
            const auto& rep = run.report;
            trace(now_, "DETECT", "vehicle=" + v.id + " arc=" + rep.location.arc +
                                      " offset=" + text::number(rep.location.offset_m) +
                                      " depth=" + text::number(rep.depth_mm) +
                                      " intensity=" + text::number(rep.intensity));
            v.warnings.insert({rep.location.arc, rep.location.offset_m});
            p2p_broadcast(vehicle, rep, now_);
            auto [crop, crop_offset] = crop_columns(result, run.first_col, run.last_col);
            enqueue_report(vehicle, PlainReport{std::move(crop.depth), std::move(crop.intensity),
                                                Location{origin.arc, from + crop_offset}, v.id, now_});
        }
    }

    std::shared_ptr<const StreetNetwork> net_;
    Scenario sc_;
    std::mt19937_64 rng_;
    SharedKey key_;
    Server server_;
    std::map<StreetNetwork::Index, GroundTruthSurface> surfaces_;
    std::vector<VehicleState> vehicles_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> queue_;
    std::vector<std::string> trace_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_serial_ = 1;
    TimeMs now_ = 0;
};

} // namespace pothole
