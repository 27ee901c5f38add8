#include "pathstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathstab {

namespace {

std::vector<EdgeIndex> sorted_unique_edges(const Path& p) {
    std::vector<EdgeIndex> edges(p.edges);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace

double weighted_jaccard(const RoadNetwork& net, const Path& a, const Path& b) {
    const auto ea = sorted_unique_edges(a);
    const auto eb = sorted_unique_edges(b);
    if (ea.empty() && eb.empty()) return 1.0;

    double inter_w = 0.0;
    double union_w = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ea.size() || j < eb.size()) {
        if (j == eb.size() || (i < ea.size() && ea[i] < eb[j])) {
            union_w += net.edge(ea[i]).length_m;
            ++i;
        } else if (i == ea.size() || eb[j] < ea[i]) {
            union_w += net.edge(eb[j]).length_m;
            ++j;
        } else {
            const double w = net.edge(ea[i]).length_m;
            inter_w += w;
            union_w += w;
            ++i;
            ++j;
        }
    }
    return inter_w / union_w;
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::optional<StabilityRecord> od_stability(const RoadNetwork& net, const ODPair& od,
                                            const PerturbationSet& pset) {
    std::vector<NodeIndex> targets;
    targets.reserve(pset.perturbed.size() + 1);
    targets.push_back(od.destination);
    for (const auto& e : pset.perturbed) targets.push_back(e.node);
    return od_stability(net, od, pset, ShortestPathTree(net, od.origin, targets));
}

std::optional<StabilityRecord> od_stability(const RoadNetwork& net, const ODPair& od,
                                            const PerturbationSet& pset,
                                            const ShortestPathTree& origin_tree) {
    if (od.origin == od.destination) {
        throw std::invalid_argument("od_stability: origin equals destination");
    }
    if (pset.original != od.destination) {
        throw std::invalid_argument("od_stability: perturbation set is for a different node");
    }
    if (origin_tree.source() != od.origin) {
        throw std::invalid_argument("od_stability: tree rooted at a different origin");
    }

    const auto original = origin_tree.path_to(od.destination);
    if (!original) return std::nullopt;

    StabilityRecord rec;
    rec.od = od;
    rec.original_path_length_m = original->total_length_m;

    double jaccard_sum = 0.0;
    for (const auto& entry : pset.perturbed) {
        const auto perturbed_path = origin_tree.path_to(entry.node);
        if (!perturbed_path) continue;  // unreachable from the origin
        const double j = weighted_jaccard(net, *original, *perturbed_path);
        rec.jaccards.emplace_back(entry.sector, j);
        jaccard_sum += j;
        if (entry.deviation.length_m) rec.deviation_lengths_m.push_back(*entry.deviation.length_m);
    }
    if (rec.jaccards.empty()) return std::nullopt;

    rec.stability = jaccard_sum / static_cast<double>(rec.jaccards.size());
    if (rec.deviation_lengths_m.empty()) {
        rec.median_deviation_m = std::numeric_limits<double>::quiet_NaN();
        rec.ratio_R = std::numeric_limits<double>::quiet_NaN();
    } else {
        rec.median_deviation_m = quantile_linear(rec.deviation_lengths_m, 0.5);
        rec.ratio_R = rec.median_deviation_m / rec.original_path_length_m;
    }
    return rec;
}

std::vector<DestinationStability> destination_stabilities(
    std::span<const StabilityRecord> records) {
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    std::map<NodeIndex, Acc> by_dest;
    for (const auto& r : records) {
        auto& acc = by_dest[r.od.destination];
        acc.sum += r.stability;
        acc.n += 1;
    }
    std::vector<DestinationStability> out;
    out.reserve(by_dest.size());
    for (const auto& [node, acc] : by_dest) {
        out.push_back(DestinationStability{node, acc.sum / static_cast<double>(acc.n), acc.n});
    }
    return out;
}

CitySummary city_summary(std::span<const StabilityRecord> records,
                         std::optional<double> filter_threshold) {
    if (records.empty()) throw std::invalid_argument("city_summary: no records");

    CitySummary summary;
    summary.filter_threshold = filter_threshold;

    std::vector<double> stabilities;
    stabilities.reserve(records.size());
    std::map<double, std::vector<double>> by_radius;
    std::vector<double> pooled_deviations;
    std::vector<double> record_medians;
    for (const auto& r : records) {
        stabilities.push_back(r.stability);
        by_radius[r.od.radius_km].push_back(r.stability);
        pooled_deviations.insert(pooled_deviations.end(), r.deviation_lengths_m.begin(),
                                 r.deviation_lengths_m.end());
        if (!std::isnan(r.median_deviation_m)) record_medians.push_back(r.median_deviation_m);
    }

    summary.stability.count = stabilities.size();
    summary.stability.median = quantile_linear(stabilities, 0.5);
    summary.stability.q1 = quantile_linear(stabilities, 0.25);
    summary.stability.q3 = quantile_linear(stabilities, 0.75);
    summary.stability.iqr = summary.stability.q3 - summary.stability.q1;
    const auto [mn, mx] = std::minmax_element(stabilities.begin(), stabilities.end());
    summary.stability.min = *mn;
    summary.stability.max = *mx;

    for (auto& [radius, values] : by_radius) {
        summary.median_by_radius_km[radius] = quantile_linear(std::move(values), 0.5);
    }
    summary.destinations = destination_stabilities(records);
    summary.median_deviation_pooled_m =
        pooled_deviations.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : quantile_linear(std::move(pooled_deviations), 0.5);
    summary.median_deviation_of_record_medians_m =
        record_medians.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : quantile_linear(std::move(record_medians), 0.5);
    return summary;
}

}  // namespace pathstab
