#include "pathstab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathstab/routing.hpp"

namespace pathstab {

void validate(const PerturbationConfig& cfg) {
    if (!(cfg.delta_min_m >= 0.0) || !(cfg.delta_min_m < cfg.delta_max_m)) {
        throw std::invalid_argument("perturbation: require 0 <= delta_min_m < delta_max_m");
    }
    if (cfg.k_sectors < 1) throw std::invalid_argument("perturbation: k_sectors must be >= 1");
    if (!(cfg.filter_percentile > 0.0) || !(cfg.filter_percentile <= 1.0)) {
        throw std::invalid_argument("perturbation: filter_percentile must be in (0, 1]");
    }
}

std::size_t sector_of(const GeoPoint& d, const GeoPoint& candidate, std::size_t k) {
    if (k < 1) throw std::invalid_argument("sector_of: k must be >= 1");
    const double bearing = initial_bearing_deg(d, candidate);  // throws on coincident points
    const double width = 360.0 / static_cast<double>(k);
    auto s = static_cast<std::size_t>(bearing / width);
    if (s >= k) s = k - 1;  // bearing is in [0, 360), guard rounding at the top edge
    return s;
}

PerturbationSet select_perturbed_destinations(const RoadNetwork& net, NodeIndex d,
                                              const PerturbationConfig& cfg) {
    validate(cfg);
    if (d >= net.node_count()) {
        throw std::invalid_argument("select_perturbed_destinations: node index out of range");
    }

    const GeoPoint& pd = net.node_point(d);
    PerturbationSet set;
    set.original = d;

    struct Bucket {
        std::vector<NodeIndex> nodes;
    };
    std::vector<Bucket> buckets(cfg.k_sectors);
    for (const auto cand : net.nodes_in_ring(pd, cfg.delta_min_m, cfg.delta_max_m)) {
        if (cand == d) continue;
        const GeoPoint& pc = net.node_point(cand);
        if (pc.lat == pd.lat && pc.lon == pd.lon) continue;  // undefined bearing
        buckets[sector_of(pd, pc, cfg.k_sectors)].nodes.push_back(cand);
    }

    const double width = 360.0 / static_cast<double>(cfg.k_sectors);
    const double mid_radius_m = (cfg.delta_min_m + cfg.delta_max_m) / 2.0;
    for (std::size_t s = 0; s < cfg.k_sectors; ++s) {
        const auto& nodes = buckets[s].nodes;
        if (nodes.empty()) continue;
        NodeIndex chosen = nodes.front();
        if (nodes.size() > 1) {
            const GeoPoint center =
                point_at(pd, mid_radius_m, (static_cast<double>(s) + 0.5) * width);
            double best = haversine_m(center, net.node_point(chosen));
            for (std::size_t i = 1; i < nodes.size(); ++i) {
                const double dist = haversine_m(center, net.node_point(nodes[i]));
                if (dist < best || (dist == best && nodes[i] < chosen)) {
                    best = dist;
                    chosen = nodes[i];
                }
            }
        }
        set.perturbed.push_back(PerturbationEntry{s, chosen, {}});
    }
    return set;
}

Deviation deviation_ratio(const RoadNetwork& net, NodeIndex d, NodeIndex dx,
                          const PerturbationConfig& cfg) {
    validate(cfg);
    if (d == dx) throw std::invalid_argument("deviation_ratio: d and dx must differ");
    Deviation dev;
    if (const auto p = shortest_path(net, d, dx)) {
        dev.length_m = p->total_length_m;
        dev.ratio = p->total_length_m / cfg.delta_max_m;
    }
    return dev;
}

void compute_deviations(const RoadNetwork& net, PerturbationSet& set,
                        const PerturbationConfig& cfg) {
    validate(cfg);
    if (set.perturbed.empty()) return;
    std::vector<NodeIndex> targets;
    targets.reserve(set.perturbed.size());
    for (const auto& e : set.perturbed) targets.push_back(e.node);

    const ShortestPathTree tree(net, set.original, targets);
    for (auto& e : set.perturbed) {
        e.deviation = Deviation{};
        if (const auto len = tree.distance_m(e.node)) {
            e.deviation.length_m = *len;
            e.deviation.ratio = *len / cfg.delta_max_m;
        }
    }
}

double percentile_nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("percentile: p must be in (0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // Small backoff keeps exact multiples (0.95 * 100) from rounding up a rank.
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

namespace {

FilterResult apply_threshold(std::vector<PerturbationSet> sets, double threshold) {
    FilterResult result;
    result.threshold_ratio = threshold;
    for (auto& set : sets) {
        std::vector<PerturbationEntry> kept;
        kept.reserve(set.perturbed.size());
        for (auto& e : set.perturbed) {
            if (!e.deviation.ratio) {
                result.n_removed_unreachable++;
            } else if (*e.deviation.ratio > threshold) {
                result.n_removed_abnormal++;
            } else {
                kept.push_back(e);
            }
        }
        set.perturbed = std::move(kept);
    }
    result.sets = std::move(sets);
    return result;
}

}  // namespace

FilterResult filter_abnormal(std::vector<PerturbationSet> sets, double percentile) {
    std::vector<double> ratios;
    for (const auto& set : sets) {
        for (const auto& e : set.perturbed) {
            if (e.deviation.ratio) ratios.push_back(*e.deviation.ratio);
        }
    }
    if (ratios.empty()) throw std::runtime_error("no valid perturbations");
    return apply_threshold(std::move(sets), percentile_nearest_rank(std::move(ratios), percentile));
}

FilterResult filter_with_threshold(std::vector<PerturbationSet> sets, double threshold_ratio) {
    if (!(threshold_ratio > 0.0)) {
        throw std::invalid_argument("filter: threshold_ratio must be > 0");
    }
    return apply_threshold(std::move(sets), threshold_ratio);
}

}  // namespace pathstab
