#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pathstab/road_graph.hpp"

namespace pathstab {

struct PerturbationConfig {
    double delta_min_m = 0.0;
    double delta_max_m = 100.0;
    std::size_t k_sectors = 8;
    double filter_percentile = 0.95;
};

/// Throws std::invalid_argument unless 0 <= delta_min < delta_max,
/// k_sectors >= 1 and filter_percentile in (0, 1].
void validate(const PerturbationConfig& cfg);

/// Deviation route p(d, dx) summary. length_m is absent when dx is
/// unreachable from d; ratio = length_m / delta_max_m otherwise.
struct Deviation {
    std::optional<double> length_m;
    std::optional<double> ratio;
};

struct PerturbationEntry {
    std::size_t sector = 0;
    NodeIndex node = kInvalidNode;
    Deviation deviation;
};

/// Perturbed destinations of one node: at most one entry per sector,
/// ascending by sector index.
struct PerturbationSet {
    NodeIndex original = kInvalidNode;
    std::vector<PerturbationEntry> perturbed;
};

/// Sector index floor(bearing(d, candidate) / (360/k)). Sector 0 starts at
/// azimuth 0 (north); intervals are half-open. Throws on coincident points.
std::size_t sector_of(const GeoPoint& d, const GeoPoint& candidate, std::size_t k);

/// Ring candidates around d split into sectors; per sector the sole candidate,
/// or the one closest to the sector center point_at(d, (dmin+dmax)/2,
/// bisector azimuth), ties to the smallest node index. Candidates coincident
/// with d (zero distance, undefined bearing) are skipped. Deviations are left
/// unset; see compute_deviations.
PerturbationSet select_perturbed_destinations(const RoadNetwork& net, NodeIndex d,
                                              const PerturbationConfig& cfg);

/// Shortest-path deviation p(d, dx) and ratio for a single pair.
Deviation deviation_ratio(const RoadNetwork& net, NodeIndex d, NodeIndex dx,
                          const PerturbationConfig& cfg);

/// Fills every entry's deviation with one multi-target shortest-path pass
/// from set.original.
void compute_deviations(const RoadNetwork& net, PerturbationSet& set,
                        const PerturbationConfig& cfg);

/// Nearest-rank percentile: the rank-ceil(p*N) smallest value (1-based).
/// Throws on empty input or p outside (0, 1].
double percentile_nearest_rank(std::vector<double> values, double p);

struct FilterResult {
    std::vector<PerturbationSet> sets;
    double threshold_ratio = 0.0;
    std::size_t n_removed_abnormal = 0;
    std::size_t n_removed_unreachable = 0;
};

/// City-level abnormality filter: threshold = nearest-rank percentile of all
/// finite deviation ratios; entries with ratio > threshold or unreachable
/// deviation are removed. Throws when no finite ratio exists.
FilterResult filter_abnormal(std::vector<PerturbationSet> sets, double percentile);

/// Same removal rule with a caller-fixed absolute ratio threshold.
FilterResult filter_with_threshold(std::vector<PerturbationSet> sets, double threshold_ratio);

}  // namespace pathstab
