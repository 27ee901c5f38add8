#include "pathstab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathstab {

void validate(const SamplingConfig& cfg) {
    if (!is_valid(cfg.center)) throw std::invalid_argument("sampling: invalid center coordinate");
    if (!(cfg.r_min_km > 0.0) || !(cfg.r_min_km <= cfg.r_max_km)) {
        throw std::invalid_argument("sampling: require 0 < r_min_km <= r_max_km");
    }
    if (!(cfg.r_step_km > 0.0)) throw std::invalid_argument("sampling: r_step_km must be > 0");
    if (cfg.n_points < 2) throw std::invalid_argument("sampling: n_points must be >= 2");
    if (!(cfg.match_threshold_m > 0.0)) {
        throw std::invalid_argument("sampling: match_threshold_m must be > 0");
    }
}

std::vector<GeoPoint> circle_points(const GeoPoint& center, double radius_km, std::size_t n) {
    if (n < 2) throw std::invalid_argument("circle_points: n must be >= 2");
    if (!(radius_km > 0.0)) throw std::invalid_argument("circle_points: radius must be > 0");
    std::vector<GeoPoint> points;
    points.reserve(n);
    const double step = 360.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        points.push_back(point_at(center, radius_km * 1000.0, step * static_cast<double>(i)));
    }
    return points;
}

std::vector<ODPair> generate_od_pairs(const RoadNetwork& net, const SamplingConfig& cfg) {
    validate(cfg);

    const std::size_t n_circles =
        static_cast<std::size_t>(std::floor((cfg.r_max_km - cfg.r_min_km) / cfg.r_step_km + 1e-9)) +
        1;
    const double azimuth_step = 360.0 / static_cast<double>(cfg.n_points);

    std::vector<ODPair> pairs;
    struct Matched {
        double azimuth_deg;
        NodeIndex node;
    };
    std::vector<Matched> matched;

    for (std::size_t c = 0; c < n_circles; ++c) {
        const double radius_km = cfg.r_min_km + static_cast<double>(c) * cfg.r_step_km;
        matched.clear();
        const auto points = circle_points(cfg.center, radius_km, cfg.n_points);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto node = net.nearest_node(points[i], cfg.match_threshold_m);
            if (!node) continue;
            const bool seen = std::any_of(matched.begin(), matched.end(),
                                          [&](const Matched& m) { return m.node == *node; });
            if (!seen) matched.push_back({azimuth_step * static_cast<double>(i), *node});
        }
        for (const auto& o : matched) {
            for (const auto& d : matched) {
                if (o.node == d.node) continue;
                pairs.push_back(ODPair{o.node, d.node, radius_km, o.azimuth_deg, d.azimuth_deg});
            }
        }
    }
    return pairs;
}

}  // namespace pathstab
