#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pathstab/csv.hpp"
#include "pathstab/road_graph.hpp"
#include "support/oracles.hpp"

using pathstab::EdgeRow;
using pathstab::GeoPoint;
using pathstab::NodeIndex;
using pathstab::NodeRow;
using pathstab::RoadNetwork;
namespace fs = std::filesystem;

namespace {

// Four nodes on a ~100 m square, reciprocal edges along each side.
RoadNetwork square_network() {
    std::vector<NodeRow> nodes{
        {"a", 0.0, 0.0},
        {"b", 0.0, 0.0009},
        {"c", 0.0009, 0.0},
        {"d", 0.0009, 0.0009},
    };
    std::vector<EdgeRow> edges{
        {"e0", "a", "b", 100.0}, {"e1", "b", "a", 100.0}, {"e2", "a", "c", 100.0},
        {"e3", "c", "a", 100.0}, {"e4", "b", "d", 100.0}, {"e5", "d", "b", 100.0},
        {"e6", "c", "d", 100.0}, {"e7", "d", "c", 100.0},
    };
    return RoadNetwork::from_tables(std::move(nodes), std::move(edges), 1.0);
}

RoadNetwork random_network(std::mt19937_64& rng, std::size_t n_nodes, std::size_t n_edges,
                           double span_deg = 0.02) {
    std::vector<NodeRow> nodes;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "n%05zu", i);
        const double lat = span_deg * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5);
        const double lon = span_deg * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5);
        nodes.push_back({id, lat, lon});
    }
    std::vector<EdgeRow> edges;
    for (std::size_t j = 0; j < n_edges; ++j) {
        char id[16];
        std::snprintf(id, sizeof(id), "e%05zu", j);
        const auto u = rng() % n_nodes;
        const auto v = rng() % n_nodes;
        const double len = 1.0 + static_cast<double>(rng() % 1'000'000) / 1000.0;
        edges.push_back({id, nodes[u].id, nodes[v].id, len});
    }
    return RoadNetwork::from_tables(std::move(nodes), std::move(edges));
}

}  // namespace

TEST_CASE("four-node square: indexing and adjacency by hand enumeration") {
    const RoadNetwork net = square_network();
    CHECK(net.node_count() == 4);
    CHECK(net.edge_count() == 8);
    // Indices follow lexicographic id order.
    CHECK(net.node_id(0) == "a");
    CHECK(net.node_id(3) == "d");
    CHECK(net.require_node("c") == 2);
    CHECK_FALSE(net.find_node("zz").has_value());
    CHECK_THROWS((void)net.require_node("zz"));
    CHECK(net.area_km2() == 1.0);

    for (NodeIndex i = 0; i < 4; ++i) {
        const auto out = net.out_edges(i);
        CHECK(out.size() == 2);  // each corner connects to its two neighbors
        for (const auto e : out) CHECK(net.edge(e).u == i);
    }
    // Edge indices follow lexicographic edge id order; e0 = a -> b.
    CHECK(net.edge_id(0) == "e0");
    CHECK(net.edge(0).u == net.require_node("a"));
    CHECK(net.edge(0).v == net.require_node("b"));
    CHECK(net.edge(0).length_m == 100.0);
}

TEST_CASE("from_tables validates its input tables") {
    const std::vector<NodeRow> nodes{{"a", 0.0, 0.0}, {"b", 0.0, 0.001}};
    const std::vector<EdgeRow> ok{{"e", "a", "b", 50.0}};

    CHECK_THROWS((void)RoadNetwork::from_tables({{"a", 0.0, 0.0}, {"a", 0.0, 0.001}}, ok));
    CHECK_THROWS((void)RoadNetwork::from_tables(nodes, {{"e", "a", "b", 50.0}, {"e", "b", "a", 50.0}}));
    CHECK_THROWS((void)RoadNetwork::from_tables(nodes, {{"e", "a", "missing", 50.0}}));
    CHECK_THROWS((void)RoadNetwork::from_tables(nodes, {{"e", "a", "b", 0.0}}));
    CHECK_THROWS((void)RoadNetwork::from_tables(nodes, {{"e", "a", "b", -5.0}}));
    CHECK_THROWS((void)RoadNetwork::from_tables({{"a", 95.0, 0.0}}, {}));
    CHECK_THROWS((void)RoadNetwork::from_tables({{"", 0.0, 0.0}}, {}));
    CHECK_THROWS((void)RoadNetwork::from_tables(nodes, ok, -1.0));
    CHECK_NOTHROW((void)RoadNetwork::from_tables(nodes, ok));
}

TEST_CASE("nearest_node agrees with a linear scan on 10,000 queries") {
    std::mt19937_64 rng(401);
    const RoadNetwork net = random_network(rng, 800, 1200);
    for (int q = 0; q < 10'000; ++q) {
        const GeoPoint p{0.03 * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5),
                         0.03 * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5)};
        const double max_dist = 1.0 + static_cast<double>(rng() % 2000);
        CHECK(net.nearest_node(p, max_dist) == oracle::nearest_node_linear(net, p, max_dist));
    }
}

TEST_CASE("nodes_in_ring agrees with a linear scan, bounds inclusive") {
    std::mt19937_64 rng(402);
    const RoadNetwork net = random_network(rng, 500, 700);
    for (int q = 0; q < 2000; ++q) {
        const GeoPoint p{0.03 * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5),
                         0.03 * (static_cast<double>(rng() % 1'000'000) / 1'000'000.0 - 0.5)};
        const double d1 = static_cast<double>(rng() % 1500);
        const double d2 = d1 + 1.0 + static_cast<double>(rng() % 500);
        const auto got = net.nodes_in_ring(p, d1, d2);
        CHECK(got == oracle::nodes_in_ring_linear(net, p, d1, d2));
        CHECK(std::is_sorted(got.begin(), got.end()));
    }

    // Both boundaries are inclusive: query exactly at a node's distance.
    const GeoPoint center{0.0, 0.0};
    const NodeIndex nearest = *net.nearest_node(center, 1e9);
    const double d = pathstab::haversine_m(center, net.node_point(nearest));
    const auto at_min = net.nodes_in_ring(center, d, d + 0.001);
    CHECK(std::count(at_min.begin(), at_min.end(), nearest) == 1);
    const auto at_max = net.nodes_in_ring(center, 0.0, d);
    CHECK(std::count(at_max.begin(), at_max.end(), nearest) == 1);
}

TEST_CASE("ring around a point 1 km from an isolated cluster is empty") {
    std::vector<NodeRow> nodes{{"a", 0.0, 0.0}, {"b", 0.0, 0.00002}, {"c", 0.00002, 0.0}};
    const RoadNetwork net = RoadNetwork::from_tables(std::move(nodes), {});
    const GeoPoint far = pathstab::point_at({0.0, 0.0}, 1000.0, 90.0);
    CHECK(net.nodes_in_ring(far, 0.0, 100.0).empty());
    CHECK_FALSE(net.nearest_node(far, 100.0).has_value());
}

TEST_CASE("spatial queries are deterministic across identical loads") {
    std::mt19937_64 rng1(403), rng2(403);
    const RoadNetwork a = random_network(rng1, 300, 400);
    const RoadNetwork b = random_network(rng2, 300, 400);
    std::mt19937_64 qrng(404);
    for (int q = 0; q < 500; ++q) {
        const GeoPoint p{0.03 * (static_cast<double>(qrng() % 1000) / 1000.0 - 0.5),
                         0.03 * (static_cast<double>(qrng() % 1000) / 1000.0 - 0.5)};
        CHECK(a.nearest_node(p, 900.0) == b.nearest_node(p, 900.0));
        CHECK(a.nodes_in_ring(p, 50.0, 800.0) == b.nodes_in_ring(p, 50.0, 800.0));
    }
}

TEST_CASE("undirected_streets: one-way edge appears once") {
    std::vector<NodeRow> nodes{{"a", 0.0, 0.0}, {"b", 0.0, 0.0005}};
    std::vector<EdgeRow> edges{{"e", "a", "b", 50.0}};
    const auto streets =
        pathstab::undirected_streets(RoadNetwork::from_tables(std::move(nodes), std::move(edges)));
    REQUIRE(streets.size() == 1);
    CHECK(streets[0].a == 0);
    CHECK(streets[0].b == 1);
    CHECK(streets[0].length_m == 50.0);
}

TEST_CASE("undirected_streets: reciprocal pairs collapse, variants stay apart") {
    std::vector<NodeRow> nodes{{"a", 0.0, 0.0}, {"b", 0.0, 0.0005}, {"c", 0.0005, 0.0}};
    std::vector<EdgeRow> edges{
        {"e0", "a", "b", 50.0}, {"e1", "b", "a", 50.0},  // reciprocal pair -> one street
        {"e2", "a", "b", 60.0},                          // different length -> its own street
        {"e3", "a", "c", 70.0}, {"e4", "a", "c", 70.0},  // parallel same direction -> two
        {"e5", "c", "c", 10.0},                          // self-loop -> one street
    };
    const auto streets =
        pathstab::undirected_streets(RoadNetwork::from_tables(std::move(nodes), std::move(edges)));
    REQUIRE(streets.size() == 5);
    std::size_t ab50 = 0, ab60 = 0, ac70 = 0, cc = 0;
    for (const auto& s : streets) {
        if (s.a == 0 && s.b == 1 && s.length_m == 50.0) ++ab50;
        if (s.a == 0 && s.b == 1 && s.length_m == 60.0) ++ab60;
        if (s.a == 0 && s.b == 2 && s.length_m == 70.0) ++ac70;
        if (s.a == 2 && s.b == 2) ++cc;
    }
    CHECK(ab50 == 1);
    CHECK(ab60 == 1);
    CHECK(ac70 == 2);
    CHECK(cc == 1);
}

TEST_CASE("undirected_streets on distinct-length graphs equals the canonical-pair set") {
    std::mt19937_64 rng(405);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n_nodes = 5 + rng() % 40;
        const std::size_t n_edges = 1 + rng() % 120;
        std::vector<NodeRow> nodes;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            char id[16];
            std::snprintf(id, sizeof(id), "n%03zu", i);
            nodes.push_back({id, 0.0001 * static_cast<double>(i), 0.0});
        }
        std::vector<EdgeRow> edges;
        std::set<std::tuple<NodeIndex, NodeIndex, double>> canonical;
        for (std::size_t j = 0; j < n_edges; ++j) {
            char id[16];
            std::snprintf(id, sizeof(id), "e%03zu", j);
            const auto u = static_cast<NodeIndex>(rng() % n_nodes);
            auto v = static_cast<NodeIndex>(rng() % n_nodes);
            if (u == v) v = (v + 1) % n_nodes;
            const double len = 1.0 + static_cast<double>(j);  // all lengths distinct
            edges.push_back({id, nodes[u].id, nodes[v].id, len});
            canonical.emplace(std::min(u, v), std::max(u, v), len);
        }
        const auto streets = pathstab::undirected_streets(
            RoadNetwork::from_tables(std::move(nodes), std::move(edges)));
        CHECK(streets.size() == canonical.size());
    }
}

TEST_CASE("CSV and GraphML exports load identically") {
    std::mt19937_64 rng(406);
    const RoadNetwork net = random_network(rng, 60, 150);

    const fs::path dir = fs::temp_directory_path() / "pathstab_roundtrip";
    fs::create_directories(dir);
    const auto nodes_path = (dir / "nodes.csv").string();
    const auto edges_path = (dir / "edges.csv").string();
    pathstab::write_network_csv(net, nodes_path, edges_path);
    const RoadNetwork from_csv = pathstab::load_network(nodes_path, edges_path);

    std::string xml =
        "<?xml version='1.0' encoding='UTF-8'?>\n"
        "<graphml>\n"
        "  <key id='d0' for='node' attr.name='x' attr.type='double'/>\n"
        "  <key id='d1' for='node' attr.name='y' attr.type='double'/>\n"
        "  <key id='d2' for='edge' attr.name='length' attr.type='double'/>\n"
        "  <graph edgedefault='directed'>\n";
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
        xml += "    <node id='" + net.node_id(i) + "'><data key='d0'>" +
               pathstab::csv::format_double(net.node_point(i).lon) + "</data><data key='d1'>" +
               pathstab::csv::format_double(net.node_point(i).lat) + "</data></node>\n";
    }
    for (pathstab::EdgeIndex e = 0; e < net.edge_count(); ++e) {
        const auto& de = net.edge(e);
        xml += "    <edge id='" + net.edge_id(e) + "' source='" + net.node_id(de.u) +
               "' target='" + net.node_id(de.v) + "'><data key='d2'>" +
               pathstab::csv::format_double(de.length_m) + "</data></edge>\n";
    }
    xml += "  </graph>\n</graphml>\n";
    const RoadNetwork from_xml = pathstab::load_graphml_text(xml);

    REQUIRE(from_csv.node_count() == net.node_count());
    REQUIRE(from_xml.node_count() == net.node_count());
    REQUIRE(from_csv.edge_count() == net.edge_count());
    REQUIRE(from_xml.edge_count() == net.edge_count());
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
        CHECK(from_csv.node_id(i) == net.node_id(i));
        CHECK(from_xml.node_id(i) == net.node_id(i));
        CHECK(from_csv.node_point(i).lat == net.node_point(i).lat);
        CHECK(from_xml.node_point(i).lat == net.node_point(i).lat);
        CHECK(from_csv.node_point(i).lon == net.node_point(i).lon);
        CHECK(from_xml.node_point(i).lon == net.node_point(i).lon);
    }
    for (pathstab::EdgeIndex e = 0; e < net.edge_count(); ++e) {
        CHECK(from_csv.edge_id(e) == net.edge_id(e));
        CHECK(from_xml.edge_id(e) == net.edge_id(e));
        CHECK(from_csv.edge(e).u == net.edge(e).u);
        CHECK(from_xml.edge(e).u == net.edge(e).u);
        CHECK(from_csv.edge(e).v == net.edge(e).v);
        CHECK(from_xml.edge(e).v == net.edge(e).v);
        CHECK(from_csv.edge(e).length_m == net.edge(e).length_m);
        CHECK(from_xml.edge(e).length_m == net.edge(e).length_m);
    }
    fs::remove_all(dir);
}

TEST_CASE("GraphML loader reports missing attributes") {
    const std::string no_length =
        "<graphml><key id='d0' for='node' attr.name='x'/><key id='d1' for='node' attr.name='y'/>"
        "<graph><node id='a'><data key='d0'>0</data><data key='d1'>0</data></node>"
        "<node id='b'><data key='d0'>0.001</data><data key='d1'>0</data></node>"
        "<edge source='a' target='b'/></graph></graphml>";
    CHECK_THROWS((void)pathstab::load_graphml_text(no_length));

    const std::string no_coord =
        "<graphml><key id='d2' for='edge' attr.name='length'/>"
        "<graph><node id='a'/></graph></graphml>";
    CHECK_THROWS((void)pathstab::load_graphml_text(no_coord));
}

TEST_CASE("load_network_text validates headers and field values") {
    CHECK_NOTHROW(
        (void)pathstab::load_network_text("node_id,lat,lon\na,0,0\n", "edge_id,u,v,length_m\n"));
    CHECK_THROWS((void)pathstab::load_network_text("node_id,lat\na,0\n", "edge_id,u,v,length_m\n"));
    CHECK_THROWS(
        (void)pathstab::load_network_text("node_id,lat,lon\na,zz,0\n", "edge_id,u,v,length_m\n"));
    CHECK_THROWS((void)pathstab::load_network_text("node_id,lat,lon\na,0,0\n",
                                                   "edge_id,u,v,length_m\ne,a,a,nope\n"));
}
