#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pothole/errors.hpp"
#include "pothole/street_network.hpp"
#include "pothole/text.hpp"

namespace pothole {

using TimeMs = std::int64_t;

/// Position along an arc, measured from its tail node.
struct Location {
    ArcId arc;
    double offset_m = 0.0;

    friend bool operator==(const Location&, const Location&) = default;
};

/// One pothole as seen by a vehicle's scanner.
struct DetectionReport {
    Location location;
    double depth_mm = 0.0;
    double intensity = 1.0; // laser return intensity in [0, 1]

    friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

/// Registry-minted pothole identification number.
struct PotholeId {
    std::uint64_t value = 0;

    std::string str() const { return std::to_string(value); }
    static PotholeId parse(std::string_view s) { return {text::parse_int<std::uint64_t>(s, "pothole id")}; }

    friend auto operator<=>(const PotholeId&, const PotholeId&) = default;
};

/// The server tuple (Depth, Location, Intensity).
struct PotholeTuple {
    double depth_mm = 0.0;
    Location location;
    double intensity = 1.0;

    friend bool operator==(const PotholeTuple&, const PotholeTuple&) = default;
};

struct PotholeRecord {
    PotholeId id;
    ArcId arc;
    double offset_m = 0.0;
    double depth_mm = 0.0;
    double intensity = 1.0;
    TimeMs first_seen_ms = 0;
    TimeMs last_seen_ms = 0;

    PotholeTuple tuple() const { return {depth_mm, {arc, offset_m}, intensity}; }

    friend bool operator==(const PotholeRecord&, const PotholeRecord&) = default;
};

struct UpdateEvent {
    PotholeId pothole;
    std::string vehicle;
    TimeMs t_ms = 0;

    friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

struct IngestOutcome {
    PotholeId id;
    bool is_new = false;

    friend bool operator==(const IngestOutcome&, const IngestOutcome&) = default;
};

struct RegistryConfig {
    double dedup_radius_m = 1.0;
};

/// Pothole records keyed by id, partitioned by arc. Repeat reports within the
/// dedup radius on the same arc merge into one record (max depth wins) and
/// every accepted report appends an UpdateEvent.
class PotholeRegistry {
public:
    explicit PotholeRegistry(std::shared_ptr<const StreetNetwork> net, RegistryConfig config = {})
        : net_(std::move(net)), config_(config)
    {
        if (!net_) {
            throw std::invalid_argument("registry requires a network");
        }
    }

    const StreetNetwork& network() const { return *net_; }
    std::shared_ptr<const StreetNetwork> network_ptr() const { return net_; }
    const RegistryConfig& config() const { return config_; }

    IngestOutcome ingest_report(const DetectionReport& report, TimeMs now, const std::string& vehicle = {})
    {
        const auto& loc = report.location;
        const Arc& arc = net_->arc(loc.arc);
        if (!std::isfinite(loc.offset_m) || loc.offset_m < 0.0 || loc.offset_m > arc.length_m) {
            throw ValidationError("offset " + text::number(loc.offset_m) + " outside arc " + arc.id);
        }
        if (!std::isfinite(report.depth_mm) || report.depth_mm < 0.0) {
            throw ValidationError("negative depth in report on arc " + arc.id);
        }

        // Nearest existing record on this arc within the radius; lowest id on ties.
        PotholeRecord* match = nullptr;
        double best = 0.0;
        if (auto it = by_arc_.find(loc.arc); it != by_arc_.end()) {
            for (auto id : it->second) {
                auto& rec = records_.at(id);
                double gap = std::abs(rec.offset_m - loc.offset_m);
                if (gap <= config_.dedup_radius_m && (match == nullptr || gap < best)) {
                    match = &rec;
                    best = gap;
                }
            }
        }

        if (match != nullptr) {
            if (report.depth_mm > match->depth_mm) {
                match->depth_mm = report.depth_mm;
                match->intensity = report.intensity;
            }
            match->last_seen_ms = std::max(match->last_seen_ms, now);
            match->first_seen_ms = std::min(match->first_seen_ms, now);
            events_.push_back({match->id, vehicle, now});
            return {match->id, false};
        }

        PotholeId id{next_id_++};
        PotholeRecord rec{id, loc.arc, loc.offset_m, report.depth_mm, report.intensity, now, now};
        records_.emplace(id, rec);
        by_arc_[loc.arc].push_back(id);
        events_.push_back({id, vehicle, now});
        return {id, true};
    }

    /// Records on `arc` in ascending id order.
    std::vector<PotholeRecord> potholes_on_arc(const ArcId& arc) const
    {
        if (!net_->has_arc(arc)) {
            throw NotFound("unknown arc " + arc);
        }
        std::vector<PotholeRecord> out;
        if (auto it = by_arc_.find(arc); it != by_arc_.end()) {
            for (auto id : it->second) {
                out.push_back(records_.at(id));
            }
        }
        return out;
    }

    const PotholeRecord& lookup(PotholeId id) const
    {
        auto it = records_.find(id);
        if (it == records_.end()) {
            throw NotFound("unknown pothole id " + id.str());
        }
        return it->second;
    }

    bool contains(PotholeId id) const { return records_.contains(id); }
    std::size_t size() const { return records_.size(); }

    /// All records in ascending id order.
    std::vector<PotholeRecord> records() const
    {
        std::vector<PotholeRecord> out;
        out.reserve(records_.size());
        for (const auto& [_, rec] : records_) {
            out.push_back(rec);
        }
        return out;
    }

    const std::vector<UpdateEvent>& events() const { return events_; }

    /// Registry dump: pothole_id,arc_id,offset_m,depth_mm,intensity,first_seen_ms,last_seen_ms
    std::string to_csv() const
    {
        std::string out = text::join(csv_header(), ",") + "\n";
        for (const auto& [_, r] : records_) {
            out += r.id.str() + "," + r.arc + "," + text::number(r.offset_m) + "," + text::number(r.depth_mm) + "," +
                   text::number(r.intensity) + "," + text::number(r.first_seen_ms) + "," +
                   text::number(r.last_seen_ms) + "\n";
        }
        return out;
    }

    /// Restores records from a dump. Ids are kept; new ids continue after
    /// the largest restored one. No update events are restored.
    static PotholeRegistry from_csv(std::shared_ptr<const StreetNetwork> net, const std::string& body,
                                    RegistryConfig config = {})
    {
        PotholeRegistry reg(std::move(net), config);
        for (auto rec : parse_records_csv(body)) {
            const Arc& arc = reg.net_->arc(rec.arc);
            if (rec.offset_m < 0.0 || rec.offset_m > arc.length_m || rec.depth_mm < 0.0 ||
                rec.last_seen_ms < rec.first_seen_ms) {
                throw ValidationError("registry record " + rec.id.str() + " violates record invariants");
            }
            if (reg.records_.contains(rec.id)) {
                throw ValidationError("duplicate pothole id " + rec.id.str());
            }
            reg.next_id_ = std::max(reg.next_id_, rec.id.value + 1);
            reg.by_arc_[rec.arc].push_back(rec.id);
            reg.records_.emplace(rec.id, std::move(rec));
        }
        for (auto& [_, ids] : reg.by_arc_) {
            std::sort(ids.begin(), ids.end());
        }
        return reg;
    }

    static const std::vector<std::string>& csv_header()
    {
        static const std::vector<std::string> h{"pothole_id", "arc_id",        "offset_m",    "depth_mm",
                                                "intensity",  "first_seen_ms", "last_seen_ms"};
        return h;
    }

    /// Parses a registry dump without binding it to a network.
    static std::vector<PotholeRecord> parse_records_csv(const std::string& body)
    {
        auto table = text::parse_csv(body, csv_header());
        std::vector<PotholeRecord> out;
        for (const auto& row : table.rows) {
            PotholeRecord rec;
            rec.id = PotholeId::parse(row[0]);
            rec.arc = row[1];
            rec.offset_m = text::parse_double(row[2], "offset_m");
            rec.depth_mm = text::parse_double(row[3], "depth_mm");
            rec.intensity = text::parse_double(row[4], "intensity");
            rec.first_seen_ms = text::parse_int<TimeMs>(row[5], "first_seen_ms");
            rec.last_seen_ms = text::parse_int<TimeMs>(row[6], "last_seen_ms");
            out.push_back(std::move(rec));
        }
        return out;
    }

private:
    std::shared_ptr<const StreetNetwork> net_;
    RegistryConfig config_;
    std::map<PotholeId, PotholeRecord> records_;
    std::unordered_map<ArcId, std::vector<PotholeId>> by_arc_;
    std::vector<UpdateEvent> events_;
    std::uint64_t next_id_ = 1;
};

// Event log CSV: pothole_id,vehicle_id,t_ms

inline std::string events_to_csv(const std::vector<UpdateEvent>& events)
{
    std::string out = "pothole_id,vehicle_id,t_ms\n";
    for (const auto& e : events) {
        out += e.pothole.str() + "," + e.vehicle + "," + text::number(e.t_ms) + "\n";
    }
    return out;
}

inline std::vector<UpdateEvent> events_from_csv(const std::string& body)
{
    auto table = text::parse_csv(body, {"pothole_id", "vehicle_id", "t_ms"});
    std::vector<UpdateEvent> out;
    for (const auto& row : table.rows) {
        out.push_back({PotholeId::parse(row[0]), row[1], text::parse_int<TimeMs>(row[2], "t_ms")});
    }
    return out;
}

} // namespace pothole
