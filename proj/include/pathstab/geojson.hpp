#pragma once

#include <span>
#include <string>
#include <vector>

#include "pathstab/road_graph.hpp"
#include "pathstab/stability.hpp"

namespace pathstab {

struct MapPoint {
    std::string node_id;
    double lat = 0.0;
    double lon = 0.0;
    double stability = 0.0;
    std::size_t n_origins = 0;
};

/// GeoJSON FeatureCollection (serialized) of destination stabilities. Each
/// feature carries `stability` and `class`: "unstable" strictly below the
/// low percentile, "stable" strictly above the high percentile, otherwise
/// "neutral". Thresholds use the index round((N-1)*p) of the sorted values
/// and are recorded in top-level metadata. Requires at least 5 points.
std::string export_stability_map(std::span<const MapPoint> points, double low_pct = 0.20,
                                 double high_pct = 0.80);

/// Convenience overload resolving coordinates through the network.
std::string export_stability_map(const RoadNetwork& net, const CitySummary& summary,
                                 double low_pct = 0.20, double high_pct = 0.80);

}  // namespace pathstab
