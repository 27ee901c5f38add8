#include "pathstab/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace pathstab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ShortestPathTree::ShortestPathTree(const RoadNetwork& net, NodeIndex source)
    : net_(&net), source_(source) {
    run(net, {});
}

ShortestPathTree::ShortestPathTree(const RoadNetwork& net, NodeIndex source,
                                   std::span<const NodeIndex> targets)
    : net_(&net), source_(source) {
    run(net, targets);
}

void ShortestPathTree::run(const RoadNetwork& net, std::span<const NodeIndex> targets) {
    const std::size_t n = net.node_count();
    if (source_ >= n) throw std::invalid_argument("shortest path: source index out of range");
    for (const auto t : targets) {
        if (t >= n) throw std::invalid_argument("shortest path: target index out of range");
    }

    dist_.assign(n, kInf);
    pred_.assign(n, kInvalidEdge);
    settled_.assign(n, 0);

    std::vector<std::uint8_t> pending(targets.empty() ? 0 : n, 0);
    std::size_t remaining = 0;
    for (const auto t : targets) {
        if (!pending[t]) {
            pending[t] = 1;
            ++remaining;
        }
    }

    using Entry = std::pair<double, NodeIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist_[source_] = 0.0;
    queue.emplace(0.0, source_);

    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (settled_[v]) continue;  // stale queue entry
        settled_[v] = 1;
        if (!targets.empty() && pending[v]) {
            pending[v] = 0;
            if (--remaining == 0) break;
        }
        for (const auto e : net.out_edges(v)) {
            const auto& de = net.edge(e);
            const double nd = d + de.length_m;
            if (nd < dist_[de.v]) {
                dist_[de.v] = nd;
                pred_[de.v] = e;
                queue.emplace(nd, de.v);
            } else if (nd == dist_[de.v] && e < pred_[de.v]) {
                // Positive edge lengths guarantee de.v is still unsettled here,
                // so equal-length predecessors may safely compete by edge index.
                pred_[de.v] = e;
            }
        }
    }
}

std::optional<double> ShortestPathTree::distance_m(NodeIndex v) const {
    if (v >= settled_.size() || !settled_[v]) return std::nullopt;
    return dist_[v];
}

std::optional<Path> ShortestPathTree::path_to(NodeIndex v) const {
    if (v >= settled_.size() || !settled_[v]) return std::nullopt;
    Path p;
    p.origin = source_;
    p.destination = v;
    p.total_length_m = dist_[v];
    for (NodeIndex cur = v; cur != source_;) {
        const EdgeIndex e = pred_[cur];
        p.edges.push_back(e);
        cur = net_->edge(e).u;
    }
    std::reverse(p.edges.begin(), p.edges.end());
    return p;
}

std::optional<Path> shortest_path(const RoadNetwork& net, NodeIndex o, NodeIndex d) {
    const NodeIndex targets[] = {d};
    return ShortestPathTree(net, o, targets).path_to(d);
}

std::optional<Path> shortest_path(const RoadNetwork& net, std::string_view origin_id,
                                  std::string_view destination_id) {
    return shortest_path(net, net.require_node(origin_id), net.require_node(destination_id));
}

}  // namespace pathstab
