#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "pothole/errors.hpp"
#include "pothole/weighting.hpp"

namespace pothole {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Predecessor {
    NodeId node;
    ArcId arc;

    friend bool operator==(const Predecessor&, const Predecessor&) = default;
};

/// Single-source result of the generalized Dijkstra pass. Per node: weight
/// distance, physical length of the chosen path, and the arc that reached it.
class ShortestPathTree {
public:
    using Index = StreetNetwork::Index;

    const NodeId& source() const { return source_; }

    bool reachable(const NodeId& v) const { return dist_[net_->node_index(v)] != kInfinity; }
    double distance(const NodeId& v) const { return dist_[net_->node_index(v)]; }
    double path_length(const NodeId& v) const { return len_[net_->node_index(v)]; }

    std::optional<Predecessor> predecessor(const NodeId& v) const
    {
        auto i = net_->node_index(v);
        if (pred_arc_[i] == kNone) {
            return std::nullopt;
        }
        const auto& arc = net_->arcs()[pred_arc_[i]];
        return Predecessor{arc.tail, arc.id};
    }

    double distance(Index v) const { return dist_[v]; }
    double path_length(Index v) const { return len_[v]; }

    /// Arc indices source -> v along the predecessor chain (empty for the source).
    std::vector<Index> arc_path(Index v) const
    {
        std::vector<Index> path;
        while (pred_arc_[v] != kNone) {
            path.push_back(pred_arc_[v]);
            v = net_->tail_index(pred_arc_[v]);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

private:
    friend ShortestPathTree gda(const WeightedNetwork&, const NodeId&);
    static constexpr Index kNone = std::numeric_limits<Index>::max();

    const StreetNetwork* net_ = nullptr;
    NodeId source_;
    std::vector<double> dist_;
    std::vector<double> len_;
    std::vector<Index> pred_arc_;
};

namespace detail {

/// Arc of the pair u->v used for relaxation: weight is the pair minimum
/// w_uv; among arcs at that weight the shortest one wins, then lowest id.
inline StreetNetwork::Index relaxation_arc(const WeightedNetwork& wnet, const WeightMultiset& wm)
{
    const auto& net = wnet.network();
    const auto& entries = wm.entries();
    double w_uv = entries.front().weight;
    auto best = net.arc_index(entries.front().arc);
    for (std::size_t k = 1; k < entries.size() && entries[k].weight == w_uv; ++k) {
        auto cand = net.arc_index(entries[k].arc);
        if (net.arcs()[cand].length_m < net.arcs()[best].length_m) {
            best = cand;
        }
    }
    return best;
}

} // namespace detail

/// Generalized Dijkstra over the min-weight multiset. Labels are ordered by
/// (weight, length, arc-id sequence); the weight component is the true
/// shortest-path distance. Throws NotFound for an unknown source and
/// ValidationError if any arc weight is negative.
inline ShortestPathTree gda(const WeightedNetwork& wnet, const NodeId& source)
{
    using Index = StreetNetwork::Index;
    const auto& net = wnet.network();
    Index s = net.node_index(source);
    for (std::size_t i = 0; i < wnet.weights().size(); ++i) {
        if (!(wnet.weights()[i] >= 0.0)) {
            throw ValidationError("negative weight on arc " + net.arcs()[i].id);
        }
    }

    ShortestPathTree tree;
    tree.net_ = &net;
    tree.source_ = source;
    tree.dist_.assign(net.node_count(), kInfinity);
    tree.len_.assign(net.node_count(), kInfinity);
    tree.pred_arc_.assign(net.node_count(), ShortestPathTree::kNone);
    std::vector<bool> settled(net.node_count(), false);

    auto arc_ids = [&](Index v, Index last_arc) {
        auto path = tree.arc_path(v);
        path.push_back(last_arc);
        std::vector<const std::string*> ids;
        ids.reserve(path.size());
        for (auto a : path) {
            ids.push_back(&net.arcs()[a].id);
        }
        return ids;
    };
    auto lex_less = [](const std::vector<const std::string*>& l, const std::vector<const std::string*>& r) {
        return std::lexicographical_compare(l.begin(), l.end(), r.begin(), r.end(),
                                            [](const std::string* a, const std::string* b) { return *a < *b; });
    };

    using Label = std::tuple<double, double, Index>;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> queue;
    tree.dist_[s] = 0.0;
    tree.len_[s] = 0.0;
    queue.emplace(0.0, 0.0, s);

    while (!queue.empty()) {
        auto [d, l, u] = queue.top();
        queue.pop();
        if (settled[u] || d != tree.dist_[u] || l != tree.len_[u]) {
            continue;
        }
        settled[u] = true;
        for (Index v : net.successors(u)) {
            if (settled[v]) {
                continue;
            }
            const auto* wm = wnet.multiset(u, v);
            Index arc = detail::relaxation_arc(wnet, *wm);
            double nd = d + wm->entries().front().weight;
            double nl = l + net.arcs()[arc].length_m;
            bool better = nd < tree.dist_[v] || (nd == tree.dist_[v] && nl < tree.len_[v]);
            if (!better && nd == tree.dist_[v] && nl == tree.len_[v]) {
                auto current = tree.pred_arc_[v];
                better = lex_less(arc_ids(u, arc), arc_ids(net.tail_index(current), current));
            }
            if (better) {
                tree.dist_[v] = nd;
                tree.len_[v] = nl;
                tree.pred_arc_[v] = arc;
                queue.emplace(nd, nl, v);
            }
        }
    }
    return tree;
}

struct Route {
    NodeId source;
    NodeId destination;
    std::vector<ArcId> arcs;
    double total_weight = 0.0;
    double total_length_m = 0.0;

    friend bool operator==(const Route&, const Route&) = default;
};

/// Route to `dest` read off an existing tree. Throws Unreachable.
inline Route route_from_tree(const WeightedNetwork& wnet, const ShortestPathTree& tree, const NodeId& dest)
{
    const auto& net = wnet.network();
    auto d = net.node_index(dest);
    if (tree.distance(d) == kInfinity) {
        throw Unreachable("destination " + dest + " unreachable from " + tree.source());
    }
    Route r{tree.source(), dest, {}, 0.0, 0.0};
    for (auto a : tree.arc_path(d)) {
        r.arcs.push_back(net.arcs()[a].id);
        r.total_weight += wnet.weight(a);
        r.total_length_m += net.arcs()[a].length_m;
    }
    return r;
}

/// Minimum-weight route; among equal weights the shortest, then the
/// lexicographically smallest arc-id sequence.
inline Route route(const WeightedNetwork& wnet, const NodeId& source, const NodeId& dest)
{
    wnet.network().node_index(dest);
    return route_from_tree(wnet, gda(wnet, source), dest);
}

/// Weight of the arc a vehicle occupies; the condition display used when no
/// destination is set.
inline double current_arc_weight(const WeightedNetwork& wnet, const ArcId& arc) { return wnet.weight(arc); }

/// `arc_id tail head weight length` per arc, then `TOTAL weight length`.
inline std::string format_route_trace(const WeightedNetwork& wnet, const Route& r)
{
    const auto& net = wnet.network();
    std::string out;
    for (const auto& id : r.arcs) {
        const auto& a = net.arc(id);
        out += a.id + " " + a.tail + " " + a.head + " " + text::number(wnet.weight(id)) + " " +
               text::number(a.length_m) + "\n";
    }
    out += "TOTAL " + text::number(r.total_weight) + " " + text::number(r.total_length_m) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Routing session: one vehicle's destination state machine.

struct ArcWeightReading {
    ArcId arc;
    double weight = 0.0;

    friend bool operator==(const ArcWeightReading&, const ArcWeightReading&) = default;
};

using SessionOutput = std::variant<std::monostate, Route, ArcWeightReading>;

class RoutingSession {
public:
    static RoutingSession at_node(NodeId node)
    {
        RoutingSession s;
        s.node_ = std::move(node);
        return s;
    }

    static RoutingSession on_arc(ArcId arc)
    {
        RoutingSession s;
        s.arc_ = std::move(arc);
        return s;
    }

    bool navigating() const { return destination_.has_value(); }
    const std::optional<NodeId>& destination() const { return destination_; }
    const std::optional<Route>& route() const { return route_; }

    /// Arc being driven, or the last one driven while stopped at a node.
    const std::optional<ArcId>& current_arc() const { return arc_; }

    /// Node the next route starts from: the head of the occupied arc, or the
    /// node the vehicle stands on. Arcs are completed before re-routing.
    NodeId anchor(const StreetNetwork& net) const
    {
        if (node_) {
            return *node_;
        }
        return net.arc(*arc_).head;
    }

    void enter_arc(const ArcId& arc)
    {
        arc_ = arc;
        node_.reset();
    }

    /// Vehicle stands on `node`. Reaching the destination ends navigation.
    void reach_node(const NodeId& node)
    {
        node_ = node;
        if (destination_ && *destination_ == node) {
            destination_.reset();
            route_.reset();
        }
    }

    /// Next route arc to enter from the current node, if navigating.
    std::optional<ArcId> next_arc()
    {
        if (!route_ || cursor_ >= route_->arcs.size()) {
            return std::nullopt;
        }
        return route_->arcs[cursor_++];
    }

    /// Set (re-route from the anchor), clear (back to weight display) or keep
    /// the destination. Unknown destination throws NotFound; an unreachable
    /// one throws Unreachable and leaves the session unchanged.
    SessionOutput modify_destination(const WeightedNetwork& wnet, const std::optional<NodeId>& new_dest)
    {
        if (new_dest == destination_) {
            return std::monostate{};
        }
        if (!new_dest) {
            destination_.reset();
            route_.reset();
            return display(wnet);
        }
        auto fresh = pothole::route(wnet, anchor(wnet.network()), *new_dest);
        destination_ = new_dest;
        cursor_ = 0;
        route_ = fresh;
        if (node_ && *node_ == *new_dest) {
            destination_.reset();
            route_.reset();
        }
        return fresh;
    }

    /// Weight display for the occupied arc; monostate while navigating or
    /// before any arc is known.
    SessionOutput display(const WeightedNetwork& wnet) const
    {
        if (navigating() || !arc_) {
            return std::monostate{};
        }
        return ArcWeightReading{*arc_, current_arc_weight(wnet, *arc_)};
    }

private:
    RoutingSession() = default;

    std::optional<NodeId> node_;
    std::optional<ArcId> arc_;
    std::optional<NodeId> destination_;
    std::optional<Route> route_;
    std::size_t cursor_ = 0;
};

} // namespace pothole
