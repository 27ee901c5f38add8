#include "pathstab/geodesy.hpp"

#include <algorithm>
#include <cmath>

namespace pathstab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double d) { return d * (kPi / 180.0); }
double rad2deg(double r) { return r * (180.0 / kPi); }

// Wrap a longitude into [-180, 180).
double wrap_lon(double lon) {
    double w = std::fmod(lon + 540.0, 360.0);
    if (w < 0.0) w += 360.0;
    return w - 180.0;
}

}  // namespace

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(b.lat - a.lat);
    const double dlam = deg2rad(b.lon - a.lon);

    const double sp = std::sin(dphi * 0.5);
    const double sl = std::sin(dlam * 0.5);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
    if (a.lat == b.lat && a.lon == b.lon) {
        throw std::invalid_argument("initial_bearing_deg: undefined bearing for coincident points");
    }
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dlam = deg2rad(b.lon - a.lon);

    const double y = std::sin(dlam) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
    double deg = rad2deg(std::atan2(y, x));
    deg = std::fmod(deg + 360.0, 360.0);
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

GeoPoint point_at(const GeoPoint& center, double distance_m, double azimuth_deg) {
    if (!(distance_m >= 0.0)) {
        throw std::invalid_argument("point_at: distance must be non-negative");
    }
    if (distance_m == 0.0) return center;

    const double delta = distance_m / kEarthRadiusM;
    const double theta = deg2rad(azimuth_deg);
    const double phi1 = deg2rad(center.lat);
    const double lam1 = deg2rad(center.lon);

    const double sin_phi2 =
        std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lam2 = lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                          std::cos(delta) - std::sin(phi1) * sin_phi2);
    return GeoPoint{rad2deg(phi2), wrap_lon(rad2deg(lam2))};
}

UnitVec3 to_unit_vector(const GeoPoint& p) {
    const double phi = deg2rad(p.lat);
    const double lam = deg2rad(p.lon);
    const double cp = std::cos(phi);
    return UnitVec3{cp * std::cos(lam), cp * std::sin(lam), std::sin(phi)};
}

double chord_sq_from_distance_m(double distance_m) {
    const double theta = std::min(distance_m / kEarthRadiusM, kPi);
    const double half_chord = std::sin(theta * 0.5);
    return 4.0 * half_chord * half_chord;
}

double distance_m_from_chord_sq(double chord_sq) {
    const double half_chord = std::sqrt(std::max(0.0, chord_sq)) * 0.5;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, half_chord));
}

}  // namespace pathstab
