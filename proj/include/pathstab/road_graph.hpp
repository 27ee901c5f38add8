#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathstab/geodesy.hpp"

namespace pathstab {

// Node and edge indices are dense and assigned in lexicographic order of the
// opaque string ids, so "smallest id" tie-break rules reduce to index
// comparisons throughout the library.
using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;
inline constexpr NodeIndex kInvalidNode = std::numeric_limits<NodeIndex>::max();
inline constexpr EdgeIndex kInvalidEdge = std::numeric_limits<EdgeIndex>::max();

struct NodeRow {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
};

struct EdgeRow {
    std::string id;
    std::string u;
    std::string v;
    double length_m = 0.0;
};

struct DirectedEdge {
    NodeIndex u = kInvalidNode;
    NodeIndex v = kInvalidNode;
    double length_m = 0.0;
};

/// Canonical undirected street: a <= b, self-loops keep a == b.
struct Street {
    NodeIndex a = kInvalidNode;
    NodeIndex b = kInvalidNode;
    double length_m = 0.0;
};

/// Immutable directed road graph with geographic coordinates and a uniform
/// grid index over the node positions. Safe for concurrent read access.
class RoadNetwork {
public:
    static RoadNetwork from_tables(std::vector<NodeRow> nodes, std::vector<EdgeRow> edges,
                                   std::optional<double> area_km2 = std::nullopt);

    std::size_t node_count() const { return points_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::string& node_id(NodeIndex i) const { return node_ids_[i]; }
    std::optional<NodeIndex> find_node(std::string_view id) const;
    NodeIndex require_node(std::string_view id) const;  // throws on unknown id
    const GeoPoint& node_point(NodeIndex i) const { return points_[i]; }

    const std::string& edge_id(EdgeIndex e) const { return edge_ids_[e]; }
    const DirectedEdge& edge(EdgeIndex e) const { return edges_[e]; }
    std::span<const EdgeIndex> out_edges(NodeIndex i) const;

    std::optional<double> area_km2() const { return area_km2_; }

    /// Node minimizing great-circle distance to p, if within max_dist_m.
    /// Ties resolve to the smallest node index (= smallest node id).
    std::optional<NodeIndex> nearest_node(const GeoPoint& p, double max_dist_m) const;

    /// All nodes with d_min_m <= haversine(center, node) <= d_max_m, both
    /// bounds inclusive; sorted by node index.
    std::vector<NodeIndex> nodes_in_ring(const GeoPoint& center, double d_min_m,
                                         double d_max_m) const;

private:
    RoadNetwork() = default;
    void build_spatial_grid();

    struct Grid {
        double lat_min = 0.0, lon_min = 0.0;
        double inv_dlat = 0.0, inv_dlon = 0.0;
        std::uint32_t nx = 1, ny = 1;
        std::vector<std::uint32_t> cell_start;  // ny*nx + 1 offsets into order
        std::vector<NodeIndex> order;           // node indices grouped by cell, ascending within
        // Unit vectors in `order` sequence, SoA for the kernels.
        std::vector<double> x, y, z;
    };

    template <typename Fn>
    void for_candidate_ranges(const GeoPoint& center, double radius_m, Fn&& fn) const;

    std::vector<std::string> node_ids_;
    std::vector<GeoPoint> points_;
    std::unordered_map<std::string, NodeIndex> node_index_;
    std::vector<std::string> edge_ids_;
    std::vector<DirectedEdge> edges_;
    std::vector<std::uint32_t> adj_offsets_;
    std::vector<EdgeIndex> adj_edges_;
    std::optional<double> area_km2_;
    Grid grid_;
};

/// Undirected street view: reciprocal directed edges of equal length collapse
/// into one street, one-way edges appear once. Deterministically ordered by
/// (a, b, length).
std::vector<Street> undirected_streets(const RoadNetwork& net);

RoadNetwork load_network(const std::string& nodes_csv_path, const std::string& edges_csv_path,
                         std::optional<double> area_km2 = std::nullopt);
RoadNetwork load_network_text(std::string_view nodes_csv, std::string_view edges_csv,
                              std::optional<double> area_km2 = std::nullopt);

RoadNetwork load_graphml(const std::string& path, std::optional<double> area_km2 = std::nullopt);
RoadNetwork load_graphml_text(std::string_view xml, std::optional<double> area_km2 = std::nullopt);

/// Writes the canonical node/edge CSV tables for a loaded network.
void write_network_csv(const RoadNetwork& net, const std::string& nodes_csv_path,
                       const std::string& edges_csv_path);

}  // namespace pathstab
