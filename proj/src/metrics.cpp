#include "pathstab/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pathstab {

StreetLengthStats street_length_stats(const RoadNetwork& net) {
    const auto streets = undirected_streets(net);
    if (streets.empty()) throw std::runtime_error("street stats: network has no streets");

    double sum = 0.0;
    for (const auto& s : streets) sum += s.length_m;
    const double mean = sum / static_cast<double>(streets.size());

    double sq = 0.0;
    for (const auto& s : streets) {
        const double d = s.length_m - mean;
        sq += d * d;
    }
    return StreetLengthStats{mean, std::sqrt(sq / static_cast<double>(streets.size())),
                             streets.size()};
}

CircuityStats average_circuity(const RoadNetwork& net) {
    CircuityStats stats;
    double sum = 0.0;
    for (const auto& s : undirected_streets(net)) {
        if (s.a == s.b) {
            stats.n_skipped++;
            continue;
        }
        const double crow = haversine_m(net.node_point(s.a), net.node_point(s.b));
        if (crow <= 0.0) {
            stats.n_skipped++;
            continue;
        }
        sum += s.length_m / crow;
        stats.n_streets++;
    }
    if (stats.n_streets == 0) {
        throw std::runtime_error("circuity: no streets with distinct endpoints");
    }
    stats.avg_circuity = sum / static_cast<double>(stats.n_streets);
    return stats;
}

double bearing_entropy(const RoadNetwork& net, std::size_t bins, bool length_weighted) {
    if (bins < 1) throw std::invalid_argument("bearing entropy: bins must be >= 1");

    const double width = 360.0 / static_cast<double>(bins);
    const double half = width / 2.0;
    std::vector<double> histogram(bins, 0.0);
    const auto bin_of = [&](double deg) {
        const double shifted = std::fmod(deg + half, 360.0);
        auto b = static_cast<std::size_t>(shifted / width);
        return b < bins ? b : bins - 1;
    };

    std::size_t n_valid = 0;
    for (const auto& s : undirected_streets(net)) {
        const GeoPoint& pa = net.node_point(s.a);
        const GeoPoint& pb = net.node_point(s.b);
        if (s.a == s.b || (pa.lat == pb.lat && pa.lon == pb.lon)) continue;
        const double fwd = initial_bearing_deg(pa, pb);
        const double rev = std::fmod(fwd + 180.0, 360.0);
        const double w = length_weighted ? s.length_m : 1.0;
        histogram[bin_of(fwd)] += w;
        histogram[bin_of(rev)] += w;
        ++n_valid;
    }
    if (n_valid == 0) throw std::runtime_error("bearing entropy: no streets with distinct endpoints");

    double total = 0.0;
    for (const double h : histogram) total += h;
    double entropy = 0.0;
    for (const double h : histogram) {
        if (h <= 0.0) continue;
        const double p = h / total;
        entropy -= p * std::log(p);
    }
    return entropy;
}

DensityMetrics density_metrics(const RoadNetwork& net) {
    const auto area = net.area_km2();
    if (!area) throw std::runtime_error("density metrics: area_km2 required");

    const auto streets = undirected_streets(net);
    std::vector<std::size_t> degree(net.node_count(), 0);
    double total_m = 0.0;
    for (const auto& s : streets) {
        degree[s.a]++;
        degree[s.b]++;  // self-loops count twice at their node
        total_m += s.length_m;
    }

    DensityMetrics dm;
    for (const auto d : degree) {
        if (d >= 3) dm.n_intersections++;
    }
    dm.total_road_length_km = total_m / 1000.0;
    dm.intersection_density_per_km2 = static_cast<double>(dm.n_intersections) / *area;
    dm.road_density_km_per_km2 = dm.total_road_length_km / *area;
    return dm;
}

CityMetrics compute_city_metrics(const RoadNetwork& net, std::size_t bearing_bins) {
    const auto lengths = street_length_stats(net);
    const auto circuity = average_circuity(net);
    const auto density = density_metrics(net);
    return CityMetrics{lengths.mean_m,
                       lengths.std_m,
                       circuity.avg_circuity,
                       bearing_entropy(net, bearing_bins),
                       density.intersection_density_per_km2,
                       density.road_density_km_per_km2,
                       density.total_road_length_km};
}

}  // namespace pathstab
