#pragma once

#include <cmath>

namespace conbatch {

// WGS84 latitude/longitude in degrees.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

inline constexpr double kEarthRadiusMeters = 6371000.0;
inline constexpr double kDegToRad = 0.017453292519943295;
// Meters per degree of great-circle arc at the given sphere radius.
inline constexpr double kMetersPerDegree = kEarthRadiusMeters * kDegToRad;

enum class DistanceMetric { haversine, planar_euclidean };

// Great-circle distance in meters.
inline double haversine(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi * 0.5);
    const double s2 = std::sin(dlam * 0.5);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

// Flat-plane alternative for synthetic boxes: degrees treated as orthogonal
// axes, both scaled by the equatorial meters-per-degree. Exact metric, so the
// triangle inequality holds without edge cases.
inline double planar_euclidean(const GeoPoint& a, const GeoPoint& b) {
    const double dx = (a.lat - b.lat) * kMetersPerDegree;
    const double dy = (a.lon - b.lon) * kMetersPerDegree;
    return std::sqrt(dx * dx + dy * dy);
}

inline double geo_distance(const GeoPoint& a, const GeoPoint& b, DistanceMetric metric) {
    return metric == DistanceMetric::haversine ? haversine(a, b) : planar_euclidean(a, b);
}

}  // namespace conbatch
