#include "pathstab/geojson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace pathstab {

std::string export_stability_map(std::span<const MapPoint> points, double low_pct,
                                 double high_pct) {
    if (points.size() < 5) {
        throw std::runtime_error("stability map: need at least 5 destinations");
    }
    if (!(low_pct >= 0.0 && low_pct <= high_pct && high_pct <= 1.0)) {
        throw std::invalid_argument("stability map: require 0 <= low <= high <= 1");
    }

    std::vector<double> sorted;
    sorted.reserve(points.size());
    for (const auto& p : points) sorted.push_back(p.stability);
    std::sort(sorted.begin(), sorted.end());
    const auto rank_of = [&](double pct) {
        const auto i = static_cast<std::size_t>(
            std::llround(static_cast<double>(sorted.size() - 1) * pct));
        return sorted[std::min(i, sorted.size() - 1)];
    };
    const double low_threshold = rank_of(low_pct);
    const double high_threshold = rank_of(high_pct);

    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["properties"] = {{"low_percentile", low_pct},
                         {"high_percentile", high_pct},
                         {"low_threshold", low_threshold},
                         {"high_threshold", high_threshold},
                         {"n_points", points.size()}};
    auto& features = doc["features"];
    features = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        const char* cls = p.stability < low_threshold    ? "unstable"
                          : p.stability > high_threshold ? "stable"
                                                         : "neutral";
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", {p.lon, p.lat}}}},
                            {"properties",
                             {{"node_id", p.node_id},
                              {"stability", p.stability},
                              {"n_origins", p.n_origins},
                              {"class", cls}}}});
    }
    return doc.dump(2) + "\n";
}

std::string export_stability_map(const RoadNetwork& net, const CitySummary& summary,
                                 double low_pct, double high_pct) {
    std::vector<MapPoint> points;
    points.reserve(summary.destinations.size());
    for (const auto& d : summary.destinations) {
        const auto& p = net.node_point(d.node);
        points.push_back(MapPoint{net.node_id(d.node), p.lat, p.lon, d.stability, d.n_origins});
    }
    return export_stability_map(points, low_pct, high_pct);
}

}  // namespace pathstab
