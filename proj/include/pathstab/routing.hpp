#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pathstab/road_graph.hpp"

namespace pathstab {

/// Directed path through the network. The edge list is empty iff
/// origin == destination, in which case total_length_m is 0.
struct Path {
    NodeIndex origin = kInvalidNode;
    NodeIndex destination = kInvalidNode;
    std::vector<EdgeIndex> edges;
    double total_length_m = 0.0;
};

inline double path_length(const Path& p) { return p.total_length_m; }

/// Single-source Dijkstra tree over edge lengths.
///
/// Deterministic tie-breaking: the queue is keyed by (distance, node index)
/// and among equal-length incoming relaxations the smaller predecessor edge
/// index wins. Indices follow lexicographic id order, so this realizes
/// "smaller node id / smaller edge id" without string comparisons.
///
/// The targets constructor stops once every target is settled; queries are
/// valid for settled nodes only (the full constructor settles every reachable
/// node).
class ShortestPathTree {
public:
    ShortestPathTree(const RoadNetwork& net, NodeIndex source);
    ShortestPathTree(const RoadNetwork& net, NodeIndex source, std::span<const NodeIndex> targets);

    NodeIndex source() const { return source_; }
    bool settled(NodeIndex v) const { return settled_[v] != 0; }

    /// Distance in meters; absent when v was not settled (in particular when
    /// v is unreachable from the source).
    std::optional<double> distance_m(NodeIndex v) const;

    /// Edge sequence from the source to v; absent when v was not settled.
    std::optional<Path> path_to(NodeIndex v) const;

private:
    void run(const RoadNetwork& net, std::span<const NodeIndex> targets);

    const RoadNetwork* net_ = nullptr;
    NodeIndex source_ = kInvalidNode;
    std::vector<double> dist_;
    std::vector<EdgeIndex> pred_;
    std::vector<std::uint8_t> settled_;
};

/// Minimum-length path from o to d, absent when d is unreachable.
std::optional<Path> shortest_path(const RoadNetwork& net, NodeIndex o, NodeIndex d);
std::optional<Path> shortest_path(const RoadNetwork& net, std::string_view origin_id,
                                  std::string_view destination_id);

}  // namespace pathstab
