#include "pathstab/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "pathstab/csv.hpp"
#include "pathstab/kernels.hpp"

namespace pathstab {

namespace {

constexpr double kPi = 3.14159265358979323846;
double deg2rad(double d) { return d * (kPi / 180.0); }
double rad2deg(double r) { return r * (180.0 / kPi); }

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

std::optional<NodeIndex> RoadNetwork::find_node(std::string_view id) const {
    const auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex RoadNetwork::require_node(std::string_view id) const {
    const auto idx = find_node(id);
    if (!idx) fail("unknown node id \"" + std::string(id) + "\"");
    return *idx;
}

std::span<const EdgeIndex> RoadNetwork::out_edges(NodeIndex i) const {
    return {adj_edges_.data() + adj_offsets_[i], adj_edges_.data() + adj_offsets_[i + 1]};
}

RoadNetwork RoadNetwork::from_tables(std::vector<NodeRow> nodes, std::vector<EdgeRow> edges,
                                     std::optional<double> area_km2) {
    RoadNetwork net;

    for (const auto& n : nodes) {
        if (n.id.empty()) fail("node with empty id");
        if (!is_valid(GeoPoint{n.lat, n.lon})) {
            fail("node \"" + n.id + "\": coordinates out of range (lat " +
                 csv::format_double(n.lat) + ", lon " + csv::format_double(n.lon) + ")");
        }
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeRow& a, const NodeRow& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i].id == nodes[i - 1].id) fail("duplicate node_id \"" + nodes[i].id + "\"");
    }
    if (nodes.size() > static_cast<std::size_t>(kInvalidNode)) fail("too many nodes");

    net.node_ids_.reserve(nodes.size());
    net.points_.reserve(nodes.size());
    net.node_index_.reserve(nodes.size());
    for (auto& n : nodes) {
        net.node_index_.emplace(n.id, static_cast<NodeIndex>(net.node_ids_.size()));
        net.node_ids_.push_back(std::move(n.id));
        net.points_.push_back(GeoPoint{n.lat, n.lon});
    }

    std::sort(edges.begin(), edges.end(),
              [](const EdgeRow& a, const EdgeRow& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i].id == edges[i - 1].id) fail("duplicate edge_id \"" + edges[i].id + "\"");
    }
    if (edges.size() > static_cast<std::size_t>(kInvalidEdge)) fail("too many edges");

    net.edge_ids_.reserve(edges.size());
    net.edges_.reserve(edges.size());
    for (auto& e : edges) {
        if (e.id.empty()) fail("edge with empty id");
        const auto u = net.find_node(e.u);
        if (!u) fail("edge \"" + e.id + "\" references unknown node \"" + e.u + "\"");
        const auto v = net.find_node(e.v);
        if (!v) fail("edge \"" + e.id + "\" references unknown node \"" + e.v + "\"");
        if (!std::isfinite(e.length_m) || e.length_m <= 0.0) {
            fail("edge \"" + e.id + "\": length_m must be positive, got " +
                 csv::format_double(e.length_m));
        }
        net.edge_ids_.push_back(std::move(e.id));
        net.edges_.push_back(DirectedEdge{*u, *v, e.length_m});
    }

    // CSR adjacency, out-edge lists ordered by edge index.
    net.adj_offsets_.assign(net.points_.size() + 1, 0);
    for (const auto& e : net.edges_) net.adj_offsets_[e.u + 1]++;
    for (std::size_t i = 1; i < net.adj_offsets_.size(); ++i) {
        net.adj_offsets_[i] += net.adj_offsets_[i - 1];
    }
    net.adj_edges_.resize(net.edges_.size());
    std::vector<std::uint32_t> cursor(net.adj_offsets_.begin(), net.adj_offsets_.end() - 1);
    for (EdgeIndex e = 0; e < net.edges_.size(); ++e) {
        net.adj_edges_[cursor[net.edges_[e].u]++] = e;
    }

    if (area_km2) {
        if (!std::isfinite(*area_km2) || *area_km2 <= 0.0) fail("area_km2 must be positive");
        net.area_km2_ = area_km2;
    }

    net.build_spatial_grid();
    return net;
}

void RoadNetwork::build_spatial_grid() {
    const std::size_t n = points_.size();
    grid_ = Grid{};
    if (n == 0) {
        grid_.cell_start.assign(2, 0);
        return;
    }

    double lat_min = points_[0].lat, lat_max = points_[0].lat;
    double lon_min = points_[0].lon, lon_max = points_[0].lon;
    for (const auto& p : points_) {
        lat_min = std::min(lat_min, p.lat);
        lat_max = std::max(lat_max, p.lat);
        lon_min = std::min(lon_min, p.lon);
        lon_max = std::max(lon_max, p.lon);
    }

    const auto side = static_cast<std::uint32_t>(
        std::clamp<double>(std::ceil(std::sqrt(static_cast<double>(n) / 2.0)), 1.0, 2048.0));
    grid_.nx = (lon_max > lon_min) ? side : 1;
    grid_.ny = (lat_max > lat_min) ? side : 1;
    grid_.lat_min = lat_min;
    grid_.lon_min = lon_min;
    grid_.inv_dlat = (lat_max > lat_min) ? grid_.ny / (lat_max - lat_min) : 0.0;
    grid_.inv_dlon = (lon_max > lon_min) ? grid_.nx / (lon_max - lon_min) : 0.0;

    const auto cell_of = [this](const GeoPoint& p) -> std::uint32_t {
        auto ix = static_cast<std::uint32_t>(
            std::min<double>((p.lon - grid_.lon_min) * grid_.inv_dlon, grid_.nx - 1));
        auto iy = static_cast<std::uint32_t>(
            std::min<double>((p.lat - grid_.lat_min) * grid_.inv_dlat, grid_.ny - 1));
        return iy * grid_.nx + ix;
    };

    const std::size_t cells = static_cast<std::size_t>(grid_.nx) * grid_.ny;
    grid_.cell_start.assign(cells + 1, 0);
    std::vector<std::uint32_t> cell_of_node(n);
    for (std::size_t i = 0; i < n; ++i) {
        cell_of_node[i] = cell_of(points_[i]);
        grid_.cell_start[cell_of_node[i] + 1]++;
    }
    for (std::size_t c = 1; c <= cells; ++c) grid_.cell_start[c] += grid_.cell_start[c - 1];

    grid_.order.resize(n);
    std::vector<std::uint32_t> cursor(grid_.cell_start.begin(), grid_.cell_start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid_.order[cursor[cell_of_node[i]]++] = static_cast<NodeIndex>(i);
    }

    grid_.x.resize(n);
    grid_.y.resize(n);
    grid_.z.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const UnitVec3 u = to_unit_vector(points_[grid_.order[k]]);
        grid_.x[k] = u.x;
        grid_.y[k] = u.y;
        grid_.z[k] = u.z;
    }
}

// Invokes fn(start, len) for every contiguous grid range whose cell may hold a
// node within radius_m of center. Coverage is conservative; callers verify
// candidates with exact haversine distances.
template <typename Fn>
void RoadNetwork::for_candidate_ranges(const GeoPoint& center, double radius_m, Fn&& fn) const {
    if (points_.empty()) return;

    const double dphi = rad2deg(radius_m / kEarthRadiusM) * (1.0 + 1e-12) + 1e-12;
    const double lat_lo = std::max(-90.0, center.lat - dphi);
    const double lat_hi = std::min(90.0, center.lat + dphi);

    bool full_lon = false;
    double lon_lo = -180.0, lon_hi = 180.0;
    const double max_abs_lat = std::min(89.9999, std::max(std::abs(lat_lo), std::abs(lat_hi)));
    const double cos_lat = std::cos(deg2rad(max_abs_lat));
    if (cos_lat <= 1e-9) {
        full_lon = true;
    } else {
        const double dlam = dphi / cos_lat;
        if (dlam >= 180.0 || center.lon - dlam < -180.0 || center.lon + dlam > 180.0) {
            full_lon = true;
        } else {
            lon_lo = center.lon - dlam;
            lon_hi = center.lon + dlam;
        }
    }

    const auto clamp_cell = [](double raw, std::uint32_t count) -> std::uint32_t {
        if (!(raw > 0.0)) return 0;
        return static_cast<std::uint32_t>(std::min<double>(raw, count - 1));
    };
    const std::uint32_t iy0 = clamp_cell(std::floor((lat_lo - grid_.lat_min) * grid_.inv_dlat), grid_.ny);
    const std::uint32_t iy1 = clamp_cell(std::floor((lat_hi - grid_.lat_min) * grid_.inv_dlat), grid_.ny);
    const std::uint32_t ix0 =
        full_lon ? 0 : clamp_cell(std::floor((lon_lo - grid_.lon_min) * grid_.inv_dlon), grid_.nx);
    const std::uint32_t ix1 = full_lon ? grid_.nx - 1
                                       : clamp_cell(std::floor((lon_hi - grid_.lon_min) * grid_.inv_dlon),
                                                    grid_.nx);

    for (std::uint32_t iy = iy0; iy <= iy1; ++iy) {
        // Consecutive cells of one row form a single contiguous range.
        const std::uint32_t c0 = iy * grid_.nx + ix0;
        const std::uint32_t c1 = iy * grid_.nx + ix1;
        const std::uint32_t start = grid_.cell_start[c0];
        const std::uint32_t end = grid_.cell_start[c1 + 1];
        if (end > start) fn(start, end - start);
    }
}

std::optional<NodeIndex> RoadNetwork::nearest_node(const GeoPoint& p, double max_dist_m) const {
    if (!(max_dist_m > 0.0)) throw std::invalid_argument("nearest_node: max_dist_m must be > 0");
    if (points_.empty()) return std::nullopt;

    const UnitVec3 q = to_unit_vector(p);
    double best_val = 0.0;
    NodeIndex best_node = kInvalidNode;
    for_candidate_ranges(p, max_dist_m, [&](std::uint32_t start, std::uint32_t len) {
        const auto am = kernels::argmin_chord_sq(grid_.x.data() + start, grid_.y.data() + start,
                                                 grid_.z.data() + start, len, q);
        if (am.pos >= len) return;
        const NodeIndex node = grid_.order[start + am.pos];
        if (best_node == kInvalidNode || am.value < best_val ||
            (am.value == best_val && node < best_node)) {
            best_val = am.value;
            best_node = node;
        }
    });

    if (best_node == kInvalidNode) return std::nullopt;
    if (haversine_m(p, points_[best_node]) > max_dist_m) return std::nullopt;
    return best_node;
}

std::vector<NodeIndex> RoadNetwork::nodes_in_ring(const GeoPoint& center, double d_min_m,
                                                  double d_max_m) const {
    if (!(d_min_m >= 0.0) || !(d_min_m < d_max_m)) {
        throw std::invalid_argument("nodes_in_ring: require 0 <= d_min < d_max");
    }
    std::vector<NodeIndex> result;
    if (points_.empty()) return result;

    // Conservative chord-space prefilter, then exact inclusive check in meters.
    const double lo = chord_sq_from_distance_m(d_min_m) * (1.0 - 1e-9);
    const double hi = chord_sq_from_distance_m(d_max_m) * (1.0 + 1e-9) + 1e-30;
    const UnitVec3 q = to_unit_vector(center);

    std::vector<std::uint32_t> positions;
    for_candidate_ranges(center, d_max_m, [&](std::uint32_t start, std::uint32_t len) {
        kernels::collect_in_range(grid_.x.data() + start, grid_.y.data() + start,
                                  grid_.z.data() + start, len, q, lo, hi, start, positions);
    });

    result.reserve(positions.size());
    for (const auto pos : positions) {
        const NodeIndex node = grid_.order[pos];
        const double r = haversine_m(center, points_[node]);
        if (r >= d_min_m && r <= d_max_m) result.push_back(node);
    }
    std::sort(result.begin(), result.end());
    return result;
}

std::vector<Street> undirected_streets(const RoadNetwork& net) {
    struct Item {
        NodeIndex a, b;
        double length_m;
        bool reversed;
    };
    std::vector<Item> items;
    items.reserve(net.edge_count());
    std::vector<Street> streets;

    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        const auto& de = net.edge(e);
        if (de.u == de.v) {
            streets.push_back(Street{de.u, de.v, de.length_m});  // self-loops never pair
            continue;
        }
        const NodeIndex a = std::min(de.u, de.v);
        const NodeIndex b = std::max(de.u, de.v);
        items.push_back(Item{a, b, de.length_m, de.u != a});
    }

    std::sort(items.begin(), items.end(), [](const Item& l, const Item& r) {
        if (l.a != r.a) return l.a < r.a;
        if (l.b != r.b) return l.b < r.b;
        return l.length_m < r.length_m;
    });

    // Within each (a, b, length) group, reciprocal pairs collapse: the group
    // contributes max(#forward, #backward) streets.
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        std::size_t fwd = 0, bwd = 0;
        while (j < items.size() && items[j].a == items[i].a && items[j].b == items[i].b &&
               items[j].length_m == items[i].length_m) {
            (items[j].reversed ? bwd : fwd)++;
            ++j;
        }
        const std::size_t count = std::max(fwd, bwd);
        for (std::size_t k = 0; k < count; ++k) {
            streets.push_back(Street{items[i].a, items[i].b, items[i].length_m});
        }
        i = j;
    }

    std::sort(streets.begin(), streets.end(), [](const Street& l, const Street& r) {
        if (l.a != r.a) return l.a < r.a;
        if (l.b != r.b) return l.b < r.b;
        return l.length_m < r.length_m;
    });
    return streets;
}

namespace {

std::vector<NodeRow> parse_nodes_table(const csv::Table& t) {
    const std::vector<std::string> expect{"node_id", "lat", "lon"};
    if (t.header != expect) {
        fail(t.source + ": expected header \"node_id,lat,lon\"");
    }
    std::vector<NodeRow> rows;
    rows.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = t.source + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 3) {
            fail(where + ": expected 3 fields, got " + std::to_string(r.size()));
        }
        const auto lat = csv::parse_double(r[1]);
        if (!lat) fail(where + ": invalid lat \"" + r[1] + "\"");
        const auto lon = csv::parse_double(r[2]);
        if (!lon) fail(where + ": invalid lon \"" + r[2] + "\"");
        rows.push_back(NodeRow{r[0], *lat, *lon});
    }
    return rows;
}

std::vector<EdgeRow> parse_edges_table(const csv::Table& t) {
    const std::vector<std::string> expect{"edge_id", "u", "v", "length_m"};
    if (t.header != expect) {
        fail(t.source + ": expected header \"edge_id,u,v,length_m\"");
    }
    std::vector<EdgeRow> rows;
    rows.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = t.source + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 4) {
            fail(where + ": expected 4 fields, got " + std::to_string(r.size()));
        }
        const auto len = csv::parse_double(r[3]);
        if (!len) fail(where + ": invalid length_m \"" + r[3] + "\"");
        rows.push_back(EdgeRow{r[0], r[1], r[2], *len});
    }
    return rows;
}

}  // namespace

RoadNetwork load_network(const std::string& nodes_csv_path, const std::string& edges_csv_path,
                         std::optional<double> area_km2) {
    return RoadNetwork::from_tables(parse_nodes_table(csv::read_file(nodes_csv_path)),
                                    parse_edges_table(csv::read_file(edges_csv_path)), area_km2);
}

RoadNetwork load_network_text(std::string_view nodes_csv, std::string_view edges_csv,
                              std::optional<double> area_km2) {
    return RoadNetwork::from_tables(parse_nodes_table(csv::read_text(nodes_csv, "<nodes>")),
                                    parse_edges_table(csv::read_text(edges_csv, "<edges>")),
                                    area_km2);
}

namespace {

using boost::property_tree::ptree;

RoadNetwork graphml_from_ptree(const ptree& doc, std::optional<double> area_km2) {
    const auto gml = doc.get_child_optional("graphml");
    if (!gml) fail("GraphML: missing <graphml> root element");
    const auto graph = gml->get_child_optional("graph");
    if (!graph) fail("GraphML: missing <graph> element");

    // key id -> attr.name, from <key> declarations.
    std::unordered_map<std::string, std::string> key_names;
    for (const auto& [tag, el] : *gml) {
        if (tag != "key") continue;
        const auto id = el.get_optional<std::string>("<xmlattr>.id");
        // The attribute is literally named "attr.name"; a '/'-separated path
        // keeps its inner dot from being read as a path separator.
        const auto name =
            el.get_optional<std::string>(ptree::path_type("<xmlattr>/attr.name", '/'));
        if (id && name) key_names[*id] = *name;
    }

    const auto data_value = [&key_names](const ptree& el,
                                         const std::string& want) -> std::optional<std::string> {
        for (const auto& [tag, d] : el) {
            if (tag != "data") continue;
            const auto key = d.get_optional<std::string>("<xmlattr>.key");
            if (!key) continue;
            const auto it = key_names.find(*key);
            if (it != key_names.end() && it->second == want) return d.get_value<std::string>();
        }
        return std::nullopt;
    };

    std::vector<NodeRow> nodes;
    std::vector<EdgeRow> edges;
    std::size_t edge_ordinal = 0;
    for (const auto& [tag, el] : *graph) {
        if (tag == "node") {
            const auto id = el.get_optional<std::string>("<xmlattr>.id");
            if (!id) fail("GraphML: node without id attribute");
            const auto x = data_value(el, "x");
            const auto y = data_value(el, "y");
            if (!x || !y) fail("GraphML: node \"" + *id + "\" missing x/y coordinate data");
            const auto lon = csv::parse_double(*x);
            const auto lat = csv::parse_double(*y);
            if (!lon || !lat) {
                fail("GraphML: node \"" + *id + "\" has non-numeric coordinates");
            }
            nodes.push_back(NodeRow{*id, *lat, *lon});
        } else if (tag == "edge") {
            const auto src = el.get_optional<std::string>("<xmlattr>.source");
            const auto dst = el.get_optional<std::string>("<xmlattr>.target");
            if (!src || !dst) fail("GraphML: edge without source/target");
            std::string id;
            if (const auto explicit_id = el.get_optional<std::string>("<xmlattr>.id")) {
                id = *explicit_id;
            } else {
                char buf[24];
                std::snprintf(buf, sizeof(buf), "_e%09zu", edge_ordinal);
                id = buf;
            }
            const std::string label = "\"" + id + "\" (" + *src + " -> " + *dst + ")";
            const auto len_text = data_value(el, "length");
            if (!len_text) fail("GraphML: edge " + label + " missing length attribute");
            const auto len = csv::parse_double(*len_text);
            if (!len) fail("GraphML: edge " + label + " has non-numeric length");
            edges.push_back(EdgeRow{std::move(id), *src, *dst, *len});
            ++edge_ordinal;
        }
    }
    return RoadNetwork::from_tables(std::move(nodes), std::move(edges), area_km2);
}

RoadNetwork graphml_from_stream(std::istream& in, const std::string& source,
                                std::optional<double> area_km2) {
    ptree doc;
    try {
        boost::property_tree::read_xml(in, doc,
                                       boost::property_tree::xml_parser::trim_whitespace);
    } catch (const std::exception& e) {
        fail(source + ": XML parse error: " + e.what());
    }
    return graphml_from_ptree(doc, area_km2);
}

}  // namespace

RoadNetwork load_graphml(const std::string& path, std::optional<double> area_km2) {
    std::ifstream in(path);
    if (!in) fail("cannot open file: " + path);
    return graphml_from_stream(in, path, area_km2);
}

RoadNetwork load_graphml_text(std::string_view xml, std::optional<double> area_km2) {
    std::istringstream in{std::string(xml)};
    return graphml_from_stream(in, "<graphml>", area_km2);
}

void write_network_csv(const RoadNetwork& net, const std::string& nodes_csv_path,
                       const std::string& edges_csv_path) {
    std::vector<std::vector<std::string>> node_rows;
    node_rows.reserve(net.node_count());
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
        const auto& p = net.node_point(i);
        node_rows.push_back({net.node_id(i), csv::format_double(p.lat), csv::format_double(p.lon)});
    }
    csv::write_file(nodes_csv_path, {"node_id", "lat", "lon"}, node_rows);

    std::vector<std::vector<std::string>> edge_rows;
    edge_rows.reserve(net.edge_count());
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        const auto& de = net.edge(e);
        edge_rows.push_back({net.edge_id(e), net.node_id(de.u), net.node_id(de.v),
                             csv::format_double(de.length_m)});
    }
    csv::write_file(edges_csv_path, {"edge_id", "u", "v", "length_m"}, edge_rows);
}

}  // namespace pathstab
