#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pothole/registry.hpp"

namespace pothole {

inline constexpr TimeMs kIntensityWindowMs = 60'000;

/// Updates per minute for one pothole: events with t in (at - 60 s, at].
inline std::size_t traffic_intensity(std::span<const UpdateEvent> events, PotholeId id, TimeMs at)
{
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const UpdateEvent& e) {
        return e.pothole == id && e.t_ms > at - kIntensityWindowMs && e.t_ms <= at;
    }));
}

/// Same, rejecting ids the registry never minted.
inline std::size_t traffic_intensity(const PotholeRegistry& registry, PotholeId id, TimeMs at)
{
    if (!registry.contains(id)) {
        throw NotFound("unknown pothole id " + id.str());
    }
    return traffic_intensity(registry.events(), id, at);
}

struct PriorityEntry {
    std::size_t rank = 0;
    PotholeId id;
    ArcId arc;
    double offset_m = 0.0;
    double depth_mm = 0.0;
    std::size_t intensity_per_min = 0;

    friend bool operator==(const PriorityEntry&, const PriorityEntry&) = default;
};

/// Ranks every record by traffic intensity (desc), then depth (desc), then
/// id (asc). Ranks start at 1.
inline std::vector<PriorityEntry> priority_report(std::span<const PotholeRecord> records,
                                                  std::span<const UpdateEvent> events, TimeMs at)
{
    std::map<PotholeId, std::size_t> counts;
    for (const auto& e : events) {
        if (e.t_ms > at - kIntensityWindowMs && e.t_ms <= at) {
            ++counts[e.pothole];
        }
    }
    std::vector<PriorityEntry> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        auto it = counts.find(r.id);
        out.push_back({0, r.id, r.arc, r.offset_m, r.depth_mm, it == counts.end() ? 0 : it->second});
    }
    std::sort(out.begin(), out.end(), [](const PriorityEntry& l, const PriorityEntry& r) {
        if (l.intensity_per_min != r.intensity_per_min) {
            return l.intensity_per_min > r.intensity_per_min;
        }
        if (l.depth_mm != r.depth_mm) {
            return l.depth_mm > r.depth_mm;
        }
        return l.id < r.id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = i + 1;
    }
    return out;
}

inline std::vector<PriorityEntry> priority_report(const PotholeRegistry& registry, TimeMs at)
{
    auto records = registry.records();
    return priority_report(records, registry.events(), at);
}

/// rank,pothole_id,arc_id,offset_m,depth_mm,intensity_per_min
inline std::string priority_report_to_csv(const std::vector<PriorityEntry>& report)
{
    std::string out = "rank,pothole_id,arc_id,offset_m,depth_mm,intensity_per_min\n";
    for (const auto& e : report) {
        out += std::to_string(e.rank) + "," + e.id.str() + "," + e.arc + "," + text::number(e.offset_m) + "," +
               text::number(e.depth_mm) + "," + std::to_string(e.intensity_per_min) + "\n";
    }
    return out;
}

} // namespace pothole
