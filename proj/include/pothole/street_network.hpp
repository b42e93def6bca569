#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pothole/errors.hpp"
#include "pothole/text.hpp"

namespace pothole {

using NodeId = std::string;
using ArcId = std::string;

struct Node {
    NodeId id;
    double x = 0.0; // meters
    double y = 0.0; // meters

    friend bool operator==(const Node&, const Node&) = default;
};

struct Arc {
    ArcId id;
    NodeId tail;
    NodeId head;
    double length_m = 0.0;

    friend bool operator==(const Arc&, const Arc&) = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Directed street multigraph. Parallel arcs between the same ordered node
/// pair are allowed; self-loops are not. Immutable once built.
class StreetNetwork {
public:
    using Index = std::size_t;

    StreetNetwork() = default;

    /// Validates and indexes. Throws ValidationError on duplicate ids,
    /// dangling endpoints, non-positive lengths, non-finite coordinates or
    /// self-loops.
    static StreetNetwork build(std::vector<Node> nodes, std::vector<Arc> arcs)
    {
        StreetNetwork net;
        net.nodes_ = std::move(nodes);
        net.arcs_ = std::move(arcs);
        for (Index i = 0; i < net.nodes_.size(); ++i) {
            const auto& n = net.nodes_[i];
            if (!text::valid_id(n.id)) {
                throw ValidationError("invalid node id '" + n.id + "'");
            }
            if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
                throw ValidationError("node " + n.id + " has non-finite coordinates");
            }
            if (!net.node_index_.emplace(n.id, i).second) {
                throw ValidationError("duplicate node id " + n.id);
            }
        }
        net.successors_.resize(net.nodes_.size());
        net.tails_.reserve(net.arcs_.size());
        net.heads_.reserve(net.arcs_.size());
        for (Index i = 0; i < net.arcs_.size(); ++i) {
            const auto& a = net.arcs_[i];
            if (!text::valid_id(a.id)) {
                throw ValidationError("invalid arc id '" + a.id + "'");
            }
            if (!net.arc_index_.emplace(a.id, i).second) {
                throw ValidationError("duplicate arc id " + a.id);
            }
            auto t = net.node_index_.find(a.tail);
            auto h = net.node_index_.find(a.head);
            if (t == net.node_index_.end() || h == net.node_index_.end()) {
                throw ValidationError("arc " + a.id + " references missing node " +
                                      (t == net.node_index_.end() ? a.tail : a.head));
            }
            if (t->second == h->second) {
                throw ValidationError("arc " + a.id + " is a self-loop on " + a.tail);
            }
            if (!std::isfinite(a.length_m) || a.length_m <= 0.0) {
                throw ValidationError("arc " + a.id + " has non-positive length");
            }
            net.tails_.push_back(t->second);
            net.heads_.push_back(h->second);
            net.pairs_[{t->second, h->second}].push_back(i);
        }
        for (auto& [pair, list] : net.pairs_) {
            std::sort(list.begin(), list.end(),
                      [&](Index l, Index r) { return net.arcs_[l].id < net.arcs_[r].id; });
            net.successors_[pair.first].push_back(pair.second);
        }
        return net;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t arc_count() const { return arcs_.size(); }

    bool has_node(const NodeId& id) const { return node_index_.contains(id); }
    bool has_arc(const ArcId& id) const { return arc_index_.contains(id); }

    Index node_index(const NodeId& id) const
    {
        auto it = node_index_.find(id);
        if (it == node_index_.end()) {
            throw NotFound("unknown node " + id);
        }
        return it->second;
    }

    Index arc_index(const ArcId& id) const
    {
        auto it = arc_index_.find(id);
        if (it == arc_index_.end()) {
            throw NotFound("unknown arc " + id);
        }
        return it->second;
    }

    const Node& node(const NodeId& id) const { return nodes_[node_index(id)]; }
    const Arc& arc(const ArcId& id) const { return arcs_[arc_index(id)]; }

    Index tail_index(Index arc) const { return tails_[arc]; }
    Index head_index(Index arc) const { return heads_[arc]; }

    /// Arc indices u->v in ascending arc-id order; empty when there are none.
    std::span<const Index> arcs_between(Index u, Index v) const
    {
        auto it = pairs_.find({u, v});
        if (it == pairs_.end()) {
            return {};
        }
        return it->second;
    }

    std::vector<Arc> arcs_between(const NodeId& u, const NodeId& v) const
    {
        std::vector<Arc> out;
        for (Index i : arcs_between(node_index(u), node_index(v))) {
            out.push_back(arcs_[i]);
        }
        return out;
    }

    /// Distinct heads reachable by one arc from u, ascending index.
    const std::vector<Index>& successors(Index u) const { return successors_[u]; }

    /// Ordered pairs (u, v) that have at least one arc, with their arc lists.
    const std::map<std::pair<Index, Index>, std::vector<Index>>& pairs() const { return pairs_; }

    /// Planar position at `offset_m` along an arc, treating it as a straight
    /// segment between its endpoint nodes.
    Point position(Index arc, double offset_m) const
    {
        const auto& t = nodes_[tails_[arc]];
        const auto& h = nodes_[heads_[arc]];
        double f = std::clamp(offset_m / arcs_[arc].length_m, 0.0, 1.0);
        return {t.x + (h.x - t.x) * f, t.y + (h.y - t.y) * f};
    }

    Point position(const Node& n) const { return {n.x, n.y}; }

    friend bool operator==(const StreetNetwork& l, const StreetNetwork& r)
    {
        return l.nodes_ == r.nodes_ && l.arcs_ == r.arcs_;
    }

private:
    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::unordered_map<NodeId, Index> node_index_;
    std::unordered_map<ArcId, Index> arc_index_;
    std::vector<Index> tails_;
    std::vector<Index> heads_;
    std::map<std::pair<Index, Index>, std::vector<Index>> pairs_;
    std::vector<std::vector<Index>> successors_;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where)
{
    if (!obj.is_object()) {
        throw ParseError(where + ": expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
            allowed.end()) {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(where + ": missing key '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(where + ": wrong type for '" + key + "'");
    }
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json parse_json(const std::string& body, const std::string& where)
{
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
}

} // namespace detail

/// Parses the network JSON format:
/// `{"nodes": [{"id", "x", "y"}...], "arcs": [{"id", "tail", "head", "length_m"}...]}`.
inline StreetNetwork parse_network(const std::string& body)
{
    auto doc = detail::parse_json(body, "network");
    detail::reject_unknown_keys(doc, {"nodes", "arcs"}, "network");
    auto node_list = detail::required<nlohmann::json>(doc, "nodes", "network");
    auto arc_list = detail::required<nlohmann::json>(doc, "arcs", "network");
    if (!node_list.is_array() || !arc_list.is_array()) {
        throw ParseError("network: 'nodes' and 'arcs' must be arrays");
    }
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < node_list.size(); ++i) {
        std::string where = "network.nodes[" + std::to_string(i) + "]";
        const auto& n = node_list[i];
        detail::reject_unknown_keys(n, {"id", "x", "y"}, where);
        nodes.push_back({detail::required<std::string>(n, "id", where), detail::required<double>(n, "x", where),
                         detail::required<double>(n, "y", where)});
    }
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < arc_list.size(); ++i) {
        std::string where = "network.arcs[" + std::to_string(i) + "]";
        const auto& a = arc_list[i];
        detail::reject_unknown_keys(a, {"id", "tail", "head", "length_m"}, where);
        arcs.push_back({detail::required<std::string>(a, "id", where), detail::required<std::string>(a, "tail", where),
                        detail::required<std::string>(a, "head", where),
                        detail::required<double>(a, "length_m", where)});
    }
    return StreetNetwork::build(std::move(nodes), std::move(arcs));
}

inline StreetNetwork load_network(const std::string& path) { return parse_network(detail::read_file(path)); }

inline std::string serialize_network(const StreetNetwork& net)
{
    nlohmann::json doc;
    doc["nodes"] = nlohmann::json::array();
    for (const auto& n : net.nodes()) {
        doc["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
    }
    doc["arcs"] = nlohmann::json::array();
    for (const auto& a : net.arcs()) {
        doc["arcs"].push_back({{"id", a.id}, {"tail", a.tail}, {"head", a.head}, {"length_m", a.length_m}});
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Weight multisets

struct WeightEntry {
    ArcId arc;
    double weight = 0.0;

    friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Arcs from one node to another, sorted by weight non-descending with ties
/// broken by ascending arc id.
class WeightMultiset {
public:
    WeightMultiset() = default;
    WeightMultiset(NodeId from, NodeId to) : from_(std::move(from)), to_(std::move(to)) {}

    const NodeId& from() const { return from_; }
    const NodeId& to() const { return to_; }
    const std::vector<WeightEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    /// Inserts or re-weights `arc`, keeping the sorted order.
    void set(const ArcId& arc, double weight)
    {
        auto it = std::find_if(entries_.begin(), entries_.end(), [&](const WeightEntry& e) { return e.arc == arc; });
        if (it != entries_.end()) {
            entries_.erase(it);
        }
        WeightEntry entry{arc, weight};
        auto pos = std::lower_bound(entries_.begin(), entries_.end(), entry, before);
        entries_.insert(pos, std::move(entry));
    }

    bool is_sorted() const { return std::is_sorted(entries_.begin(), entries_.end(), before); }

    friend bool operator==(const WeightMultiset&, const WeightMultiset&) = default;

private:
    static bool before(const WeightEntry& l, const WeightEntry& r)
    {
        if (l.weight != r.weight) {
            return l.weight < r.weight;
        }
        return l.arc < r.arc;
    }

    NodeId from_;
    NodeId to_;
    std::vector<WeightEntry> entries_;
};

/// First entry of a sorted multiset; throws std::invalid_argument when empty.
inline WeightEntry min_weight(const WeightMultiset& wm)
{
    if (wm.empty()) {
        throw std::invalid_argument("min_weight of empty multiset " + wm.from() + "->" + wm.to());
    }
    return wm.entries().front();
}

struct MinWeightEntry {
    NodeId from;
    NodeId to;
    double weight = 0.0;
    ArcId arc;

    friend bool operator==(const MinWeightEntry&, const MinWeightEntry&) = default;
};

} // namespace pothole
