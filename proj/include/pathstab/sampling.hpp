#pragma once

#include <cstddef>
#include <vector>

#include "pathstab/road_graph.hpp"

namespace pathstab {

struct SamplingConfig {
    GeoPoint center{};
    double r_min_km = 1.0;
    double r_max_km = 30.0;
    double r_step_km = 1.0;
    std::size_t n_points = 36;
    double match_threshold_m = 500.0;
};

/// Throws std::invalid_argument unless 0 < r_min <= r_max, r_step > 0,
/// n_points >= 2, match_threshold_m > 0 and center is a valid coordinate.
void validate(const SamplingConfig& cfg);

/// Ordered origin/destination pair sampled from one circle. Azimuths identify
/// the circle points the nodes were matched to.
struct ODPair {
    NodeIndex origin = kInvalidNode;
    NodeIndex destination = kInvalidNode;
    double radius_km = 0.0;
    double origin_azimuth_deg = 0.0;
    double dest_azimuth_deg = 0.0;
};

/// n points on the circle of the given radius around center, at azimuths
/// 0, 360/n, 2*360/n, ... degrees.
std::vector<GeoPoint> circle_points(const GeoPoint& center, double radius_km, std::size_t n);

/// Radial OD sample: per circle, match every circle point to its nearest
/// network node within cfg.match_threshold_m, drop unmatched points, collapse
/// repeated nodes (keeping the first matching azimuth), and emit all ordered
/// pairs of distinct matched nodes. Result is ordered by (radius,
/// origin_azimuth, dest_azimuth).
std::vector<ODPair> generate_od_pairs(const RoadNetwork& net, const SamplingConfig& cfg);

}  // namespace pathstab
