#pragma once

#include <stdexcept>

namespace pathstab {

// Spherical Earth model shared by every module. Ellipsoidal corrections are
// irrelevant at the perturbation (<= 100 m) and sampling (<= 30 km) scales
// this library works at.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Geographic coordinate in decimal degrees. lat in [-90, 90], lon in [-180, 180].
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

bool is_valid(const GeoPoint& p);

/// Great-circle distance in meters. Symmetric and non-negative.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Forward azimuth from a to b, clockwise from geographic north, in [0, 360).
/// Throws std::invalid_argument for coincident points (bearing undefined).
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

/// Destination point at the given great-circle distance and azimuth from center.
GeoPoint point_at(const GeoPoint& center, double distance_m, double azimuth_deg);

// Cartesian unit vector on the sphere. Squared chord length between two unit
// vectors is a monotone function of great-circle distance, so nearest-node
// and ring queries can run on plain mul/add arithmetic (see kernels.hpp) and
// convert thresholds once.
struct UnitVec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

UnitVec3 to_unit_vector(const GeoPoint& p);

/// Squared chord length on the unit sphere equivalent to a geodesic distance.
double chord_sq_from_distance_m(double distance_m);

/// Inverse of chord_sq_from_distance_m.
double distance_m_from_chord_sq(double chord_sq);

}  // namespace pathstab
