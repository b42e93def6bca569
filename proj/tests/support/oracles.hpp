#pragma once

// Independent test oracles: exhaustive path enumeration, a plain Dijkstra
// that relaxes every parallel arc, and a direct evaluation of the arc-weight
// formula. None of these reuse the library's routing or weighting code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "pothole/registry.hpp"
#include "pothole/street_network.hpp"

namespace oracle {

using pothole::Arc;
using pothole::ArcId;
using pothole::Node;
using pothole::NodeId;
using pothole::StreetNetwork;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool close(double a, double b, double rel = 1e-12)
{
    if (a == b) {
        return true;
    }
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

inline std::string pad(std::size_t i, char prefix)
{
    std::string s = std::to_string(i);
    return std::string(1, prefix) + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

struct PotholeSpec {
    double offset_m = 0.0;
    double depth_mm = 0.0;
};

/// A generated multigraph plus the pothole set per arc it was seeded with.
struct Instance {
    std::shared_ptr<const StreetNetwork> net;
    std::map<ArcId, std::vector<PotholeSpec>> potholes;
};

struct GenConfig {
    std::size_t max_nodes = 8;
    std::size_t max_parallel = 3;
    double arc_probability = 0.45;  // chance an ordered pair gets any arcs at all
    std::size_t max_potholes = 3;
    double pothole_probability = 0.5; // chance an arc is damaged at all
    bool integer_depths = false;     // keeps every average exact when true
};

/// Random directed multigraph, <= max_nodes nodes and <= max_parallel arcs
/// per ordered pair, no self-loops. Arc ids are shuffled so id order does not
/// follow generation order. Lengths are whole meters in [8, 40] so every
/// pothole set below fits with > 1 m spacing.
template <typename Rng>
Instance random_instance(Rng& rng, const GenConfig& cfg = {})
{
    std::uniform_int_distribution<std::size_t> node_count(2, cfg.max_nodes);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> coord(0, 500);
    std::uniform_int_distribution<int> length(8, 40);
    std::uniform_int_distribution<std::size_t> parallel(1, cfg.max_parallel);
    std::uniform_int_distribution<std::size_t> pothole_count(1, cfg.max_potholes);
    std::uniform_int_distribution<int> depth_int(0, 120);

    std::size_t n = node_count(rng);
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back({pad(i, 'n'), static_cast<double>(coord(rng)), static_cast<double>(coord(rng))});
    }
    std::vector<Arc> arcs;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v || unit(rng) >= cfg.arc_probability) {
                continue;
            }
            std::size_t k = parallel(rng);
            for (std::size_t j = 0; j < k; ++j) {
                arcs.push_back({"", nodes[u].id, nodes[v].id, static_cast<double>(length(rng))});
            }
        }
    }
    std::vector<std::size_t> ids(arcs.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ids[i] = i;
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        arcs[i].id = pad(ids[i], 'e');
    }

    Instance inst;
    for (const auto& a : arcs) {
        if (unit(rng) >= cfg.pothole_probability) {
            continue;
        }
        std::size_t k = pothole_count(rng);
        auto& list = inst.potholes[a.id];
        for (std::size_t j = 0; j < k; ++j) {
            double offset = a.length_m * static_cast<double>(j + 1) / static_cast<double>(k + 1);
            double depth = cfg.integer_depths ? static_cast<double>(depth_int(rng))
                                              : static_cast<double>(depth_int(rng)) + 0.1 * (depth_int(rng) % 10);
            list.push_back({offset, depth});
        }
        if (cfg.integer_depths) {
            // Same depth across the arc keeps the average an exact integer.
            for (auto& p : list) {
                p.depth_mm = list.front().depth_mm;
            }
        }
    }
    inst.net = std::make_shared<const StreetNetwork>(StreetNetwork::build(std::move(nodes), std::move(arcs)));
    return inst;
}

/// Ingests the instance's potholes arc by arc, in generation order.
inline pothole::PotholeRegistry build_registry(const Instance& inst)
{
    pothole::PotholeRegistry reg(inst.net);
    for (const auto& [arc, list] : inst.potholes) {
        for (const auto& p : list) {
            reg.ingest_report({{arc, p.offset_m}, p.depth_mm, 1.0}, 0);
        }
    }
    return reg;
}

/// Arc weight straight from the pothole list: (sum of depths / count) * length.
inline double expected_weight(const std::vector<PotholeSpec>& potholes, double length_m)
{
    if (potholes.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& p : potholes) {
        sum += p.depth_mm;
    }
    return sum / static_cast<double>(potholes.size()) * length_m;
}

/// Expected weight of every arc, keyed by arc id.
inline std::map<ArcId, double> expected_weights(const Instance& inst)
{
    std::map<ArcId, double> out;
    for (const auto& a : inst.net->arcs()) {
        auto it = inst.potholes.find(a.id);
        out[a.id] = it == inst.potholes.end() ? 0.0 : expected_weight(it->second, a.length_m);
    }
    return out;
}

struct PathSummary {
    bool found = false;
    double weight = kInf;
    double length = kInf;            // shortest length among weight-minimal paths
    std::vector<ArcId> arcs;         // lexicographically smallest among those
    std::size_t simple_paths = 0;
};

/// Enumerates every simple s->d path over every individual arc. With
/// `exact` the weight ties are compared with ==, otherwise with close().
inline PathSummary enumerate_paths(const StreetNetwork& net, const std::map<ArcId, double>& weight,
                                   const NodeId& s, const NodeId& d, bool exact = true)
{
    PathSummary best;
    if (s == d) {
        best.found = true;
        best.weight = 0.0;
        best.length = 0.0;
        best.simple_paths = 1;
        return best;
    }
    std::map<NodeId, std::vector<const Arc*>> out;
    for (const auto& a : net.arcs()) {
        out[a.tail].push_back(&a);
    }
    std::map<NodeId, bool> on_path;
    std::vector<ArcId> path;

    auto eq = [&](double a, double b) { return exact ? a == b : close(a, b); };

    std::function<void(const NodeId&, double, double)> dfs = [&](const NodeId& u, double w, double l) {
        if (u == d) {
            ++best.simple_paths;
            bool better = !best.found || (w < best.weight && !eq(w, best.weight));
            if (!better && eq(w, best.weight)) {
                if (l < best.length) {
                    better = true;
                } else if (l == best.length && path < best.arcs) {
                    better = true;
                }
            }
            if (better) {
                best.found = true;
                best.weight = w;
                best.length = l;
                best.arcs = path;
            }
            return;
        }
        on_path[u] = true;
        for (const Arc* a : out[u]) {
            if (on_path[a->head]) {
                continue;
            }
            path.push_back(a->id);
            dfs(a->head, w + weight.at(a->id), l + a->length_m);
            path.pop_back();
        }
        on_path[u] = false;
    };
    dfs(s, 0.0, 0.0);
    return best;
}

struct Path {
    std::vector<ArcId> arcs;
    double weight = 0.0;
};

/// Every simple s->d path with its weight.
inline std::vector<Path> all_simple_paths(const StreetNetwork& net, const std::map<ArcId, double>& weight,
                                          const NodeId& s, const NodeId& d)
{
    std::vector<Path> found;
    std::map<NodeId, std::vector<const Arc*>> out;
    for (const auto& a : net.arcs()) {
        out[a.tail].push_back(&a);
    }
    std::map<NodeId, bool> on_path;
    Path cur;
    std::function<void(const NodeId&)> dfs = [&](const NodeId& u) {
        if (u == d) {
            cur.weight = 0.0;
            for (const auto& id : cur.arcs) {
                cur.weight += weight.at(id);
            }
            found.push_back(cur);
            return;
        }
        on_path[u] = true;
        for (const Arc* a : out[u]) {
            if (on_path[a->head]) {
                continue;
            }
            cur.arcs.push_back(a->id);
            dfs(a->head);
            cur.arcs.pop_back();
        }
        on_path[u] = false;
    };
    dfs(s);
    return found;
}

/// Textbook Dijkstra relaxing every arc on its own (no pair collapse).
inline std::map<NodeId, double> dijkstra_all_arcs(const StreetNetwork& net, const std::map<ArcId, double>& weight,
                                                  const NodeId& s)
{
    std::map<NodeId, double> dist;
    for (const auto& n : net.nodes()) {
        dist[n.id] = kInf;
    }
    std::map<NodeId, std::vector<const Arc*>> out;
    for (const auto& a : net.arcs()) {
        out[a.tail].push_back(&a);
    }
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0.0;
    pq.emplace(0.0, s);
    std::map<NodeId, bool> done;
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (done[u]) {
            continue;
        }
        done[u] = true;
        for (const Arc* a : out[u]) {
            double nd = du + weight.at(a->id);
            if (nd < dist[a->head]) {
                dist[a->head] = nd;
                pq.emplace(nd, a->head);
            }
        }
    }
    return dist;
}

/// Arc weights as a map read from the library's weighted network; used when
/// an oracle needs the same weights the router saw.
template <typename Weighted>
std::map<ArcId, double> weight_map(const Weighted& wnet)
{
    std::map<ArcId, double> out;
    const auto& arcs = wnet.network().arcs();
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        out[arcs[i].id] = wnet.weight(i);
    }
    return out;
}

} // namespace oracle
