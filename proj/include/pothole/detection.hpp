#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pothole/errors.hpp"
#include "pothole/registry.hpp"

namespace pothole {

/// A longitudinal pit in the road surface of one arc.
struct Pit {
    double center_m = 0.0;
    double half_length_m = 0.0;
    double depth_mm = 0.0;
    double reflectivity = 1.0;

    double start_m() const { return center_m - half_length_m; }
    double end_m() const { return center_m + half_length_m; }
    bool covers(double offset) const { return offset >= start_m() && offset <= end_m(); }

    friend bool operator==(const Pit&, const Pit&) = default;
};

/// Scenario-defined truth that the scanner observes along one arc.
struct GroundTruthSurface {
    ArcId arc;
    double arc_length_m = 0.0;
    std::vector<Pit> pits;

    void validate() const
    {
        if (!(arc_length_m > 0.0)) {
            throw ValidationError("surface of arc " + arc + " has non-positive length");
        }
        for (const auto& p : pits) {
            if (!(p.half_length_m >= 0.0) || p.start_m() < 0.0 || p.end_m() > arc_length_m) {
                throw ValidationError("pit on arc " + arc + " extends outside the arc");
            }
            if (!(p.depth_mm >= 0.0)) {
                throw ValidationError("pit on arc " + arc + " has negative depth");
            }
            if (!(p.reflectivity >= 0.0 && p.reflectivity <= 1.0)) {
                throw ValidationError("pit on arc " + arc + " has reflectivity outside [0,1]");
            }
        }
    }
};

/// Row-major depth grid in millimeters. Columns run along the arc; the last
/// column may be shorter than `cell_m` when the swept extent is not a
/// multiple of it.
struct DepthMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double cell_m = 0.5;
    double extent_m = 0.0;
    std::vector<double> depth_mm;

    double at(std::size_t r, std::size_t c) const { return depth_mm[r * cols + c]; }

    /// Longitudinal sample point of column c, relative to the sweep origin.
    double column_center(std::size_t c) const
    {
        double lo = static_cast<double>(c) * cell_m;
        double hi = std::min(static_cast<double>(c + 1) * cell_m, extent_m);
        return 0.5 * (lo + hi);
    }

    friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

struct IntensityImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    friend bool operator==(const IntensityImage&, const IntensityImage&) = default;
};

struct SweepConfig {
    double cell_m = 0.5;
    std::size_t rows = 1;
};

struct Scan {
    DepthMap depth;
    IntensityImage intensity;
};

/// Samples the surface over [start_m, end_m]. Each column reads the deepest
/// pit covering its center (0 when none) and that pit's reflectivity (1.0
/// when none). Pits are uniform across rows.
inline Scan sweep(const GroundTruthSurface& surface, double start_m, double end_m, const SweepConfig& cfg = {})
{
    if (!(start_m < end_m)) {
        throw std::invalid_argument("degenerate sweep window");
    }
    if (start_m < 0.0 || end_m > surface.arc_length_m) {
        throw std::out_of_range("sweep window outside arc " + surface.arc);
    }
    if (!(cfg.cell_m > 0.0) || cfg.rows == 0) {
        throw std::invalid_argument("sweep needs a positive cell size and at least one row");
    }
    Scan scan;
    double extent = end_m - start_m;
    auto cols = static_cast<std::size_t>(std::ceil(extent / cfg.cell_m - 1e-9));
    cols = std::max<std::size_t>(cols, 1);
    scan.depth = {cfg.rows, cols, cfg.cell_m, extent, std::vector<double>(cfg.rows * cols, 0.0)};
    scan.intensity = {cfg.rows, cols, std::vector<double>(cfg.rows * cols, 1.0)};
    for (std::size_t c = 0; c < cols; ++c) {
        double x = start_m + scan.depth.column_center(c);
        const Pit* deepest = nullptr;
        for (const auto& p : surface.pits) {
            if (p.covers(x) && (deepest == nullptr || p.depth_mm > deepest->depth_mm)) {
                deepest = &p;
            }
        }
        if (deepest == nullptr) {
            continue;
        }
        for (std::size_t r = 0; r < cfg.rows; ++r) {
            scan.depth.depth_mm[r * cols + c] = deepest->depth_mm;
            scan.intensity.values[r * cols + c] = deepest->reflectivity;
        }
    }
    return scan;
}

/// A supra-threshold run of columns and the report it produced.
struct DetectionRun {
    std::size_t first_col = 0;
    std::size_t last_col = 0;
    DetectionReport report;
};

/// Threshold + longitudinal connected components. A column is "hot" when
/// any row reaches `threshold_mm`; each maximal run of hot columns yields one
/// report: max depth, depth-weighted centroid offset, mean intensity.
inline std::vector<DetectionRun> extract_runs(const DepthMap& dm, const IntensityImage& ii, double threshold_mm,
                                              const Location& origin)
{
    if (!(threshold_mm > 0.0)) {
        throw std::invalid_argument("detection threshold must be positive");
    }
    if (dm.rows != ii.rows || dm.cols != ii.cols || dm.depth_mm.size() != dm.rows * dm.cols ||
        ii.values.size() != ii.rows * ii.cols) {
        throw std::invalid_argument("depth map and intensity image dimensions differ");
    }
    std::vector<double> column_depth(dm.cols, 0.0);
    for (std::size_t c = 0; c < dm.cols; ++c) {
        for (std::size_t r = 0; r < dm.rows; ++r) {
            column_depth[c] = std::max(column_depth[c], dm.at(r, c));
        }
    }

    std::vector<DetectionRun> runs;
    std::size_t c = 0;
    while (c < dm.cols) {
        if (column_depth[c] < threshold_mm) {
            ++c;
            continue;
        }
        std::size_t first = c;
        while (c < dm.cols && column_depth[c] >= threshold_mm) {
            ++c;
        }
        std::size_t last = c - 1;

        double peak = 0.0, weight = 0.0, moment = 0.0, intensity = 0.0;
        for (std::size_t k = first; k <= last; ++k) {
            peak = std::max(peak, column_depth[k]);
            weight += column_depth[k];
            moment += column_depth[k] * dm.column_center(k);
            for (std::size_t r = 0; r < dm.rows; ++r) {
                intensity += ii.at(r, k);
            }
        }
        double centroid = std::clamp(moment / weight, 0.0, dm.extent_m);
        double cells = static_cast<double>((last - first + 1) * dm.rows);
        runs.push_back({first, last, {{origin.arc, origin.offset_m + centroid}, peak, intensity / cells}});
    }
    return runs;
}

inline std::vector<DetectionReport> extract_potholes(const DepthMap& dm, const IntensityImage& ii,
                                                     double threshold_mm, const Location& origin)
{
    std::vector<DetectionReport> out;
    for (auto& run : extract_runs(dm, ii, threshold_mm, origin)) {
        out.push_back(std::move(run.report));
    }
    return out;
}

/// Columns [first, last] of a scan as a standalone scan, returned with its
/// origin offset relative to the original origin.
inline std::pair<Scan, double> crop_columns(const Scan& scan, std::size_t first, std::size_t last)
{
    const auto& dm = scan.depth;
    if (first > last || last >= dm.cols) {
        throw std::out_of_range("crop outside scan");
    }
    double lo = static_cast<double>(first) * dm.cell_m;
    double hi = std::min(static_cast<double>(last + 1) * dm.cell_m, dm.extent_m);
    std::size_t cols = last - first + 1;
    Scan out;
    out.depth = {dm.rows, cols, dm.cell_m, hi - lo, {}};
    out.intensity = {dm.rows, cols, {}};
    for (std::size_t r = 0; r < dm.rows; ++r) {
        for (std::size_t c = first; c <= last; ++c) {
            out.depth.depth_mm.push_back(dm.at(r, c));
            out.intensity.values.push_back(scan.intensity.at(r, c));
        }
    }
    return {std::move(out), lo};
}

/// Debug dump of a grid, one CSV row per grid row.
inline std::string depth_map_to_csv(const DepthMap& dm)
{
    std::string out;
    for (std::size_t r = 0; r < dm.rows; ++r) {
        for (std::size_t c = 0; c < dm.cols; ++c) {
            out += (c == 0 ? "" : ",") + text::number(dm.at(r, c));
        }
        out += "\n";
    }
    return out;
}

} // namespace pothole
