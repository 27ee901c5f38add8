#pragma once

#include <cstddef>

#include "pathstab/road_graph.hpp"

namespace pathstab {

struct StreetLengthStats {
    double mean_m = 0.0;
    double std_m = 0.0;  // population standard deviation
    std::size_t count = 0;
};

struct CircuityStats {
    double avg_circuity = 0.0;
    std::size_t n_streets = 0;  // streets contributing to the mean
    std::size_t n_skipped = 0;  // self-loops and zero-distance endpoints
};

struct DensityMetrics {
    double intersection_density_per_km2 = 0.0;
    double road_density_km_per_km2 = 0.0;
    double total_road_length_km = 0.0;
    std::size_t n_intersections = 0;
};

struct CityMetrics {
    double avg_street_length_m = 0.0;
    double std_street_length_m = 0.0;
    double avg_circuity = 0.0;
    double bearing_entropy = 0.0;
    double intersection_density_per_km2 = 0.0;
    double road_density_km_per_km2 = 0.0;
    double total_road_length_km = 0.0;
};

/// Mean and population std over undirected street lengths. Throws when the
/// network has no streets.
StreetLengthStats street_length_stats(const RoadNetwork& net);

/// Mean of street length / great-circle endpoint distance. Self-loops and
/// zero-distance endpoints are skipped and counted. Throws when no street
/// qualifies.
CircuityStats average_circuity(const RoadNetwork& net);

/// Shannon entropy (nats) of the street bearing histogram. Every street with
/// distinct endpoint coordinates contributes its forward bearing and the
/// reverse (+180 mod 360). Bins are equal-width with the first bin centered
/// on 0 degrees. Histogram counts streets unless length_weighted.
double bearing_entropy(const RoadNetwork& net, std::size_t bins = 36,
                       bool length_weighted = false);

/// Intersection density (street degree >= 3), road density and total street
/// length, normalized by net.area_km2(). Throws when the area is missing.
DensityMetrics density_metrics(const RoadNetwork& net);

/// All of the above with default entropy binning.
CityMetrics compute_city_metrics(const RoadNetwork& net, std::size_t bearing_bins = 36);

}  // namespace pathstab
