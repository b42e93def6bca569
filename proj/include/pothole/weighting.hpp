#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pothole/registry.hpp"
#include "pothole/street_network.hpp"

namespace pothole {

struct ArcDamage {
    double damage_sum = 0.0; // mm
    std::size_t count = 0;
    double average = 0.0; // mm; 0 for an arc without potholes

    friend bool operator==(const ArcDamage&, const ArcDamage&) = default;
};

/// Sum, count and mean of pothole depths on one arc. Depths are summed in
/// ascending pothole-id order so full and incremental passes agree bit for bit.
inline ArcDamage arc_damage(const ArcId& arc, const PotholeRegistry& registry)
{
    ArcDamage d;
    for (const auto& rec : registry.potholes_on_arc(arc)) {
        d.damage_sum += rec.depth_mm;
        ++d.count;
    }
    d.average = d.count == 0 ? 0.0 : d.damage_sum / static_cast<double>(d.count);
    return d;
}

/// Street network annotated with w(e) = d(e) * l(e) (units mm*m), plus the
/// per-pair weight multisets and the min-weight multiset derived from them.
class WeightedNetwork {
public:
    using Index = StreetNetwork::Index;

    /// Full pass over every arc.
    static WeightedNetwork preprocess(std::shared_ptr<const StreetNetwork> net, const PotholeRegistry& registry)
    {
        WeightedNetwork w(std::move(net));
        const auto& arcs = w.net_->arcs();
        for (Index i = 0; i < arcs.size(); ++i) {
            w.damage_[i] = arc_damage(arcs[i].id, registry);
            w.weights_[i] = w.damage_[i].average * arcs[i].length_m;
        }
        for (const auto& [pair, list] : w.net_->pairs()) {
            WeightMultiset wm(w.net_->nodes()[pair.first].id, w.net_->nodes()[pair.second].id);
            for (Index a : list) {
                wm.set(arcs[a].id, w.weights_[a]);
            }
            w.multisets_.emplace(pair, std::move(wm));
        }
        w.rebuild_min_multiset();
        return w;
    }

    /// Recomputes one arc after a registry change and repairs its pair's
    /// multiset and min entry.
    void apply_update(const ArcId& arc, const PotholeRegistry& registry)
    {
        Index i = net_->arc_index(arc);
        damage_[i] = arc_damage(arc, registry);
        weights_[i] = damage_[i].average * net_->arcs()[i].length_m;
        std::pair<Index, Index> key{net_->tail_index(i), net_->head_index(i)};
        auto& wm = multisets_.at(key);
        wm.set(arc, weights_[i]);
        auto front = wm.entries().front();
        for (auto& entry : min_multiset_) {
            if (entry.from == wm.from() && entry.to == wm.to()) {
                entry.weight = front.weight;
                entry.arc = front.arc;
                break;
            }
        }
    }

    const StreetNetwork& network() const { return *net_; }
    std::shared_ptr<const StreetNetwork> network_ptr() const { return net_; }

    double weight(Index arc) const { return weights_[arc]; }
    double weight(const ArcId& arc) const { return weights_[net_->arc_index(arc)]; }
    const ArcDamage& damage(Index arc) const { return damage_[arc]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Multiset for u->v (index form); nullptr when no arc joins them.
    const WeightMultiset* multiset(Index u, Index v) const
    {
        auto it = multisets_.find({u, v});
        return it == multisets_.end() ? nullptr : &it->second;
    }

    const WeightMultiset& multiset(const NodeId& u, const NodeId& v) const
    {
        auto* wm = multiset(net_->node_index(u), net_->node_index(v));
        if (wm == nullptr) {
            throw NotFound("no arcs from " + u + " to " + v);
        }
        return *wm;
    }

    /// One entry per ordered pair with at least one arc, in pair index order.
    const std::vector<MinWeightEntry>& min_weight_multiset() const { return min_multiset_; }

    /// Weighted-network dump: arc_id,tail,head,length_m,pothole_count,avg_damage_mm,weight
    std::string to_csv() const
    {
        std::string out = "arc_id,tail,head,length_m,pothole_count,avg_damage_mm,weight\n";
        const auto& arcs = net_->arcs();
        for (Index i = 0; i < arcs.size(); ++i) {
            out += arcs[i].id + "," + arcs[i].tail + "," + arcs[i].head + "," + text::number(arcs[i].length_m) + "," +
                   std::to_string(damage_[i].count) + "," + text::number(damage_[i].average) + "," +
                   text::number(weights_[i]) + "\n";
        }
        return out;
    }

    /// Exact equality of weights, damages, multiset orders and min entries.
    friend bool operator==(const WeightedNetwork& l, const WeightedNetwork& r)
    {
        return *l.net_ == *r.net_ && l.weights_ == r.weights_ && l.damage_ == r.damage_ &&
               l.multisets_ == r.multisets_ && l.min_multiset_ == r.min_multiset_;
    }

private:
    explicit WeightedNetwork(std::shared_ptr<const StreetNetwork> net)
        : net_(std::move(net)), weights_(net_->arc_count(), 0.0), damage_(net_->arc_count())
    {
    }

    void rebuild_min_multiset()
    {
        min_multiset_.clear();
        for (const auto& [_, wm] : multisets_) {
            auto front = min_weight(wm);
            min_multiset_.push_back({wm.from(), wm.to(), front.weight, front.arc});
        }
    }

    std::shared_ptr<const StreetNetwork> net_;
    std::vector<double> weights_;
    std::vector<ArcDamage> damage_;
    std::map<std::pair<Index, Index>, WeightMultiset> multisets_;
    std::vector<MinWeightEntry> min_multiset_;
};

inline WeightedNetwork preprocess(std::shared_ptr<const StreetNetwork> net, const PotholeRegistry& registry)
{
    return WeightedNetwork::preprocess(std::move(net), registry);
}

} // namespace pothole
