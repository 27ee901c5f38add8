#pragma once

#include <cstdint>
#include <vector>

#include "pathstab/road_graph.hpp"

namespace pathstab {

enum class SynthKind { grid, radial, organic };

struct SynthSpec {
    SynthKind kind = SynthKind::grid;
    double extent_km = 1.0;
    double spacing_m = 100.0;
    std::uint64_t seed = 0;
    double one_way_fraction = 0.0;
    GeoPoint center{0.0, 0.0};
};

/// Throws std::invalid_argument on non-positive extent/spacing or
/// one_way_fraction outside [0, 1].
void validate(const SynthSpec& spec);

struct SynthTables {
    std::vector<NodeRow> nodes;
    std::vector<EdgeRow> edges;
    double area_km2 = 0.0;
};

/// Deterministic synthetic networks:
///  - grid: square lattice of side extent_km at spacing_m, reciprocal edges,
///    a seeded one_way_fraction of adjacencies reduced to one direction;
///  - radial: 16 spokes from the center plus ring roads at every spacing
///    level out to extent_km;
///  - organic: the grid with seeded node jitter up to 0.4 * spacing_m and
///    seeded deletion of 20% of adjacencies.
/// Edge lengths are the great-circle distances of their endpoints.
SynthTables generate_tables(const SynthSpec& spec);
RoadNetwork generate(const SynthSpec& spec);

}  // namespace pathstab
