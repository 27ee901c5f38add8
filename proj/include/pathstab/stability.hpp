#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pathstab/perturbation.hpp"
#include "pathstab/routing.hpp"
#include "pathstab/sampling.hpp"

namespace pathstab {

/// Stability of one OD pair under destination perturbation.
struct StabilityRecord {
    ODPair od;
    double original_path_length_m = 0.0;
    std::vector<std::pair<std::size_t, double>> jaccards;  // (sector, similarity)
    double stability = 0.0;                                 // mean of jaccards
    std::vector<double> deviation_lengths_m;                // l(p(d, dx)) where known
    double median_deviation_m = 0.0;  // NaN when no deviation lengths are known
    double ratio_R = 0.0;             // median_deviation_m / original_path_length_m
};

struct DestinationStability {
    NodeIndex node = kInvalidNode;
    double stability = 0.0;  // mean over origins
    std::size_t n_origins = 0;
};

struct DistributionSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct CitySummary {
    DistributionSummary stability;
    std::map<double, double> median_by_radius_km;
    std::vector<DestinationStability> destinations;  // ascending node index
    std::optional<double> filter_threshold;
    // City-level deviation length medians under both readings: pooled over
    // every known deviation length, and over per-record medians.
    double median_deviation_pooled_m = 0.0;
    double median_deviation_of_record_medians_m = 0.0;
};

/// Weighted Jaccard similarity of two paths over their edge sets, weighted by
/// edge length. Repeated edges count once. Both paths empty compares as 1.
double weighted_jaccard(const RoadNetwork& net, const Path& a, const Path& b);

/// Quantile with linear interpolation between closest ranks, q in [0, 1].
/// Sorts a copy of the input; throws on empty input.
double quantile_linear(std::vector<double> values, double q);

/// Stability record for one OD pair. Perturbed destinations unreachable from
/// the origin are dropped; absent when the destination itself is unreachable
/// or no perturbed path remains. The origin_tree overload requires a tree
/// rooted at od.origin whose targets included od.destination and every
/// perturbed node (a full tree also qualifies).
std::optional<StabilityRecord> od_stability(const RoadNetwork& net, const ODPair& od,
                                            const PerturbationSet& pset);
std::optional<StabilityRecord> od_stability(const RoadNetwork& net, const ODPair& od,
                                            const PerturbationSet& pset,
                                            const ShortestPathTree& origin_tree);

/// Mean stability per destination over all origins, ascending node index.
std::vector<DestinationStability> destination_stabilities(
    std::span<const StabilityRecord> records);

/// Distribution summaries over a city's records. Throws on empty input.
CitySummary city_summary(std::span<const StabilityRecord> records,
                         std::optional<double> filter_threshold = std::nullopt);

}  // namespace pathstab
