#include "pathstab/synthgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pathstab/rng.hpp"

namespace pathstab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kSpokes = 16;

// Decorrelated RNG streams per generation phase.
constexpr std::uint64_t kJitterSalt = 1;
constexpr std::uint64_t kDeleteSalt = 2;
constexpr std::uint64_t kOneWaySalt = 3;

std::string node_name(std::size_t a, std::size_t b) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "n%04zu_%04zu", a, b);
    return buf;
}

std::string edge_name(std::size_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "e%08zu", ordinal);
    return buf;
}

GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m) {
    const double m_per_deg = kEarthRadiusM * kPi / 180.0;
    const double lat = origin.lat + north_m / m_per_deg;
    const double lon = origin.lon + east_m / (m_per_deg * std::cos(origin.lat * kPi / 180.0));
    return GeoPoint{lat, lon};
}

struct Adjacency {
    std::size_t a = 0;
    std::size_t b = 0;
};

// Expands adjacencies to directed edges, downgrading a seeded fraction to
// one-way. Order of `adjacencies` fixes the RNG stream.
void emit_edges(SynthTables& tables, const std::vector<Adjacency>& adjacencies,
                double one_way_fraction, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, kOneWaySalt));
    std::size_t ordinal = 0;
    const auto add = [&](std::size_t from, std::size_t to) {
        const double length =
            haversine_m(GeoPoint{tables.nodes[from].lat, tables.nodes[from].lon},
                        GeoPoint{tables.nodes[to].lat, tables.nodes[to].lon});
        tables.edges.push_back(
            EdgeRow{edge_name(ordinal++), tables.nodes[from].id, tables.nodes[to].id, length});
    };
    for (const auto& adj : adjacencies) {
        if (one_way_fraction > 0.0 && u01(rng) < one_way_fraction) {
            if (u01(rng) < 0.5) {
                add(adj.a, adj.b);
            } else {
                add(adj.b, adj.a);
            }
        } else {
            add(adj.a, adj.b);
            add(adj.b, adj.a);
        }
    }
}

SynthTables make_lattice(const SynthSpec& spec, bool organic) {
    const std::size_t side =
        static_cast<std::size_t>(std::llround(spec.extent_km * 1000.0 / spec.spacing_m)) + 1;
    const double half_span = static_cast<double>(side - 1) / 2.0 * spec.spacing_m;

    SynthTables tables;
    const double span_km = static_cast<double>(side - 1) * spec.spacing_m / 1000.0;
    tables.area_km2 = std::max(span_km * span_km, 1e-6);

    std::mt19937_64 jitter_rng(mix_seed(spec.seed, kJitterSalt));
    tables.nodes.reserve(side * side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            double east = static_cast<double>(c) * spec.spacing_m - half_span;
            double north = static_cast<double>(r) * spec.spacing_m - half_span;
            if (organic) {
                east += (2.0 * u01(jitter_rng) - 1.0) * 0.4 * spec.spacing_m;
                north += (2.0 * u01(jitter_rng) - 1.0) * 0.4 * spec.spacing_m;
            }
            const GeoPoint p = offset_m(spec.center, east, north);
            tables.nodes.push_back(NodeRow{node_name(r, c), p.lat, p.lon});
        }
    }

    std::vector<Adjacency> adjacencies;
    const auto at = [side](std::size_t r, std::size_t c) { return r * side + c; };
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            if (c + 1 < side) adjacencies.push_back({at(r, c), at(r, c + 1)});
            if (r + 1 < side) adjacencies.push_back({at(r, c), at(r + 1, c)});
        }
    }

    if (organic && !adjacencies.empty()) {
        std::mt19937_64 delete_rng(mix_seed(spec.seed, kDeleteSalt));
        std::vector<std::size_t> order(adjacencies.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(u01(delete_rng) * static_cast<double>(i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }
        const std::size_t n_delete = adjacencies.size() / 5;
        std::vector<std::size_t> doomed(order.begin(), order.begin() + n_delete);
        std::sort(doomed.begin(), doomed.end(), std::greater<>());
        for (const auto idx : doomed) adjacencies.erase(adjacencies.begin() + idx);
    }

    emit_edges(tables, adjacencies, spec.one_way_fraction, spec.seed);
    return tables;
}

SynthTables make_radial(const SynthSpec& spec) {
    const auto levels =
        static_cast<std::size_t>(std::floor(spec.extent_km * 1000.0 / spec.spacing_m + 1e-9));

    SynthTables tables;
    const double radius_km = static_cast<double>(levels) * spec.spacing_m / 1000.0;
    tables.area_km2 = std::max(kPi * radius_km * radius_km, 1e-6);

    tables.nodes.push_back(NodeRow{node_name(0, 0), spec.center.lat, spec.center.lon});
    for (std::size_t l = 1; l <= levels; ++l) {
        for (std::size_t s = 0; s < kSpokes; ++s) {
            const GeoPoint p = point_at(spec.center, static_cast<double>(l) * spec.spacing_m,
                                        static_cast<double>(s) * (360.0 / kSpokes));
            tables.nodes.push_back(NodeRow{node_name(l, s), p.lat, p.lon});
        }
    }

    const auto at = [](std::size_t l, std::size_t s) {
        return l == 0 ? std::size_t{0} : 1 + (l - 1) * kSpokes + s;
    };
    std::vector<Adjacency> adjacencies;
    for (std::size_t s = 0; s < kSpokes; ++s) {
        for (std::size_t l = 1; l <= levels; ++l) {
            adjacencies.push_back({at(l - 1, l == 1 ? 0 : s), at(l, s)});
        }
    }
    for (std::size_t l = 1; l <= levels; ++l) {
        for (std::size_t s = 0; s < kSpokes; ++s) {
            adjacencies.push_back({at(l, s), at(l, (s + 1) % kSpokes)});
        }
    }

    emit_edges(tables, adjacencies, spec.one_way_fraction, spec.seed);
    return tables;
}

}  // namespace

void validate(const SynthSpec& spec) {
    if (!(spec.extent_km > 0.0)) throw std::invalid_argument("synth: extent_km must be > 0");
    if (!(spec.spacing_m > 0.0)) throw std::invalid_argument("synth: spacing_m must be > 0");
    if (!(spec.one_way_fraction >= 0.0 && spec.one_way_fraction <= 1.0)) {
        throw std::invalid_argument("synth: one_way_fraction must be in [0, 1]");
    }
    if (!is_valid(spec.center)) throw std::invalid_argument("synth: invalid center");
}

SynthTables generate_tables(const SynthSpec& spec) {
    validate(spec);
    switch (spec.kind) {
        case SynthKind::grid:
            return make_lattice(spec, false);
        case SynthKind::organic:
            return make_lattice(spec, true);
        case SynthKind::radial:
            return make_radial(spec);
    }
    throw std::logic_error("synth: unknown kind");
}

RoadNetwork generate(const SynthSpec& spec) {
    auto tables = generate_tables(spec);
    return RoadNetwork::from_tables(std::move(tables.nodes), std::move(tables.edges),
                                    tables.area_km2);
}

}  // namespace pathstab
