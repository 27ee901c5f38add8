#pragma once

// Brute-force reference implementations the test suites compare the library
// against. Everything here favors obviousness over speed: linear scans,
// Bellman-Ford relaxation, exhaustive path enumeration, direct set
// arithmetic. Only the geodesy primitives are shared with the library; they
// are validated separately against planar approximations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathstab/geodesy.hpp"
#include "pathstab/perturbation.hpp"
#include "pathstab/road_graph.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Planar approximation around a reference point, meters east/north. Valid for
// offsets small against the Earth radius; used to cross-check bearings and
// distances at sub-kilometer scale.

struct PlanarXY {
    double x = 0.0;  // east
    double y = 0.0;  // north
};

inline PlanarXY planar_offset(const pathstab::GeoPoint& origin, const pathstab::GeoPoint& p) {
    const double m_per_deg = pathstab::kEarthRadiusM * std::acos(-1.0) / 180.0;
    return {(p.lon - origin.lon) * m_per_deg * std::cos(origin.lat * std::acos(-1.0) / 180.0),
            (p.lat - origin.lat) * m_per_deg};
}

inline double planar_distance_m(const pathstab::GeoPoint& a, const pathstab::GeoPoint& b) {
    const PlanarXY d = planar_offset(a, b);
    return std::hypot(d.x, d.y);
}

/// Bearing a -> b in [0, 360) under the planar approximation.
inline double planar_bearing_deg(const pathstab::GeoPoint& a, const pathstab::GeoPoint& b) {
    const PlanarXY d = planar_offset(a, b);
    double deg = std::atan2(d.x, d.y) * 180.0 / std::acos(-1.0);
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

// ---------------------------------------------------------------------------
// Linear-scan spatial queries.

inline std::optional<pathstab::NodeIndex> nearest_node_linear(const pathstab::RoadNetwork& net,
                                                              const pathstab::GeoPoint& p,
                                                              double max_dist_m) {
    std::optional<pathstab::NodeIndex> best;
    double best_dist = max_dist_m;
    for (pathstab::NodeIndex i = 0; i < net.node_count(); ++i) {
        const double d = pathstab::haversine_m(p, net.node_point(i));
        if (d < best_dist || (d == best_dist && !best)) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

inline std::vector<pathstab::NodeIndex> nodes_in_ring_linear(const pathstab::RoadNetwork& net,
                                                             const pathstab::GeoPoint& center,
                                                             double d_min_m, double d_max_m) {
    std::vector<pathstab::NodeIndex> out;
    for (pathstab::NodeIndex i = 0; i < net.node_count(); ++i) {
        const double d = pathstab::haversine_m(center, net.node_point(i));
        if (d >= d_min_m && d <= d_max_m) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bellman-Ford shortest distances. With positive edge lengths the fixpoint is
// the minimum over simple paths of the floating-point path sum (accumulated
// origin-first), which is exactly what Dijkstra computes, so comparisons can
// demand exact equality. Assumes edge lengths within a few orders of
// magnitude of each other, as everywhere in these tests.

inline std::vector<double> bf_distances(const pathstab::RoadNetwork& net,
                                        pathstab::NodeIndex source) {
    std::vector<double> dist(net.node_count(), kInf);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < std::max<std::size_t>(net.node_count(), 2); ++round) {
        bool changed = false;
        for (pathstab::EdgeIndex e = 0; e < net.edge_count(); ++e) {
            const auto& de = net.edge(e);
            if (dist[de.u] == kInf) continue;
            const double nd = dist[de.u] + de.length_m;
            if (nd < dist[de.v]) {
                dist[de.v] = nd;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return dist;
}

/// Edge sequence of the tie-broken shortest path: walking back from d, each
/// step takes the smallest edge index e = (u, v) with dist[u] + w(e) equal to
/// dist[v]. Matches the routing tie-break (smaller predecessor edge wins).
inline std::optional<std::vector<pathstab::EdgeIndex>> bf_path(const pathstab::RoadNetwork& net,
                                                               std::span<const double> dist,
                                                               pathstab::NodeIndex o,
                                                               pathstab::NodeIndex d) {
    if (dist[d] == kInf) return std::nullopt;
    std::vector<pathstab::EdgeIndex> rev;
    pathstab::NodeIndex v = d;
    std::size_t steps = 0;
    while (v != o) {
        pathstab::EdgeIndex best = pathstab::kInvalidEdge;
        for (pathstab::EdgeIndex e = 0; e < net.edge_count(); ++e) {
            const auto& de = net.edge(e);
            if (de.v != v || dist[de.u] == kInf) continue;
            if (dist[de.u] + de.length_m == dist[v] && e < best) best = e;
        }
        if (best == pathstab::kInvalidEdge || ++steps > net.node_count()) {
            throw std::logic_error("bf_path: predecessor walk failed");
        }
        rev.push_back(best);
        v = net.edge(best).u;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

/// Minimum length over all simple paths o -> d by exhaustive DFS enumeration.
/// Prunes only branches whose partial sum already reached the best total,
/// which cannot change the minimum (edge lengths are positive).
inline std::optional<double> min_simple_path_length(const pathstab::RoadNetwork& net,
                                                    pathstab::NodeIndex o,
                                                    pathstab::NodeIndex d) {
    double best = kInf;
    std::vector<char> on_path(net.node_count(), 0);
    auto dfs = [&](auto&& self, pathstab::NodeIndex u, double sum) -> void {
        if (sum >= best) return;
        if (u == d) {
            best = sum;
            return;
        }
        on_path[u] = 1;
        for (const pathstab::EdgeIndex e : net.out_edges(u)) {
            const auto& de = net.edge(e);
            if (!on_path[de.v]) self(self, de.v, sum + de.length_m);
        }
        on_path[u] = 0;
    };
    dfs(dfs, o, 0.0);
    if (best == kInf) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------------------
// Direct weighted Jaccard over edge index sets.

inline double direct_jaccard(const pathstab::RoadNetwork& net,
                             std::span<const pathstab::EdgeIndex> a,
                             std::span<const pathstab::EdgeIndex> b) {
    const std::set<pathstab::EdgeIndex> sa(a.begin(), a.end());
    const std::set<pathstab::EdgeIndex> sb(b.begin(), b.end());
    std::set<pathstab::EdgeIndex> uni = sa;
    uni.insert(sb.begin(), sb.end());
    if (uni.empty()) return 1.0;
    double inter_w = 0.0;
    double union_w = 0.0;
    for (const pathstab::EdgeIndex e : uni) {
        const double w = net.edge(e).length_m;
        union_w += w;
        if (sa.count(e) && sb.count(e)) inter_w += w;
    }
    return inter_w / union_w;
}

// ---------------------------------------------------------------------------
// Independent perturbation selection: linear ring scan, sectors from the
// shared bearing primitive, closest-to-sector-center by exhaustive check.

inline pathstab::PerturbationSet brute_select(const pathstab::RoadNetwork& net,
                                              pathstab::NodeIndex d,
                                              const pathstab::PerturbationConfig& cfg) {
    const pathstab::GeoPoint& dp = net.node_point(d);
    const double width = 360.0 / static_cast<double>(cfg.k_sectors);
    std::vector<std::optional<pathstab::NodeIndex>> pick(cfg.k_sectors);
    for (const pathstab::NodeIndex c :
         nodes_in_ring_linear(net, dp, cfg.delta_min_m, cfg.delta_max_m)) {
        const pathstab::GeoPoint& cp = net.node_point(c);
        if (c == d || (cp.lat == dp.lat && cp.lon == dp.lon)) continue;
        std::size_t s = static_cast<std::size_t>(
            std::floor(pathstab::initial_bearing_deg(dp, cp) / width));
        if (s >= cfg.k_sectors) s = cfg.k_sectors - 1;
        if (!pick[s]) {
            pick[s] = c;
            continue;
        }
        const pathstab::GeoPoint sc =
            pathstab::point_at(dp, (cfg.delta_min_m + cfg.delta_max_m) / 2.0,
                               (static_cast<double>(s) + 0.5) * width);
        const double cur = pathstab::haversine_m(sc, net.node_point(*pick[s]));
        const double cand = pathstab::haversine_m(sc, cp);
        if (cand < cur || (cand == cur && c < *pick[s])) pick[s] = c;
    }
    pathstab::PerturbationSet set;
    set.original = d;
    for (std::size_t s = 0; s < cfg.k_sectors; ++s) {
        if (pick[s]) set.perturbed.push_back({s, *pick[s], {}});
    }
    return set;
}

inline double brute_percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    if (rank < 1) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

// ---------------------------------------------------------------------------
// End-to-end stability oracle for small graphs: independent perturbation
// selection, Bellman-Ford deviations and routes, abnormality filter, direct
// Jaccard, arithmetic mean. Returns one stability per OD pair, absent when
// the destination is unreachable or no perturbed route remains.

struct BruteOD {
    pathstab::NodeIndex origin;
    pathstab::NodeIndex destination;
};

inline std::vector<std::optional<double>> brute_pipeline_stability(
    const pathstab::RoadNetwork& net, std::span<const BruteOD> pairs,
    const pathstab::PerturbationConfig& cfg) {
    std::set<pathstab::NodeIndex> dests;
    for (const auto& od : pairs) dests.insert(od.destination);

    std::map<pathstab::NodeIndex, pathstab::PerturbationSet> sets;
    std::vector<double> ratios;
    for (const pathstab::NodeIndex d : dests) {
        pathstab::PerturbationSet set = brute_select(net, d, cfg);
        const std::vector<double> dist = bf_distances(net, d);
        for (auto& entry : set.perturbed) {
            if (dist[entry.node] != kInf) {
                entry.deviation.length_m = dist[entry.node];
                entry.deviation.ratio = dist[entry.node] / cfg.delta_max_m;
                ratios.push_back(*entry.deviation.ratio);
            }
        }
        sets.emplace(d, std::move(set));
    }
    if (ratios.empty()) throw std::runtime_error("brute oracle: no valid perturbations");
    const double threshold = brute_percentile(ratios, cfg.filter_percentile);
    for (auto& [d, set] : sets) {
        std::erase_if(set.perturbed, [&](const pathstab::PerturbationEntry& e) {
            return !e.deviation.ratio || *e.deviation.ratio > threshold;
        });
    }

    std::vector<std::optional<double>> out;
    out.reserve(pairs.size());
    for (const auto& od : pairs) {
        const std::vector<double> dist = bf_distances(net, od.origin);
        const auto original = bf_path(net, dist, od.origin, od.destination);
        if (!original) {
            out.emplace_back(std::nullopt);
            continue;
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& entry : sets.at(od.destination).perturbed) {
            const auto alt = bf_path(net, dist, od.origin, entry.node);
            if (!alt) continue;
            sum += direct_jaccard(net, *original, *alt);
            ++n;
        }
        if (n == 0) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(sum / static_cast<double>(n));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seeded random digraphs for routing comparisons. Node ids are zero-padded so
// lexicographic id order equals construction order.

inline pathstab::RoadNetwork random_digraph(std::mt19937_64& rng, std::size_t max_nodes = 12,
                                            std::size_t max_edges = 30) {
    const std::size_t n = 2 + rng() % (max_nodes - 1);
    const std::size_t m = 1 + rng() % max_edges;
    std::vector<pathstab::NodeRow> nodes;
    nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char id[24];
        std::snprintf(id, sizeof(id), "n%02zu", i);
        const double lat = -0.05 + 0.1 * (static_cast<double>(rng() % 10'000) / 10'000.0);
        const double lon = -0.05 + 0.1 * (static_cast<double>(rng() % 10'000) / 10'000.0);
        nodes.push_back({id, lat, lon});
    }
    std::vector<pathstab::EdgeRow> edges;
    edges.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        char id[24];
        std::snprintf(id, sizeof(id), "e%03zu", j);
        const auto u = rng() % n;
        const auto v = rng() % n;
        const double len = 10.0 + static_cast<double>(rng() % 99'000) / 100.0;
        edges.push_back({id, nodes[u].id, nodes[v].id, len});
    }
    return pathstab::RoadNetwork::from_tables(std::move(nodes), std::move(edges));
}

}  // namespace oracle
