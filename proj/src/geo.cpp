#include "geosid/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "geosid/error.hpp"

namespace geosid {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double sq(double x) { return x * x; }

}  // namespace

double normalize_longitude(double lon_deg) {
    if (!std::isfinite(lon_deg)) fail("InvalidCoordinate", "longitude is not finite");
    if (lon_deg > -180.0 && lon_deg <= 180.0) return lon_deg;
    double lon = std::fmod(lon_deg, 360.0);
    if (lon <= -180.0) lon += 360.0;
    if (lon > 180.0) lon -= 360.0;
    return lon;
}

double wrap_angle(double radians) {
    constexpr double pi = std::numbers::pi;
    if (radians > -pi && radians <= pi) return radians;
    double a = std::remainder(radians, 2.0 * pi);  // [-pi, pi]
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
    if (!std::isfinite(lat_deg) || lat_deg < -90.0 || lat_deg > 90.0) {
        fail("InvalidCoordinate", "latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
    }
    lat_ = lat_deg;
    lon_ = normalize_longitude(lon_deg);
}

double haversine_km(const GeoPoint& a, const GeoPoint& b, const EarthModel& earth) {
    if (!(earth.radius_km > 0.0)) fail("InvalidEarthModel", "radius must be positive");
    const double phi0 = a.lat() * kDegToRad;
    const double phi = b.lat() * kDegToRad;
    const double dpsi = (b.lon() - a.lon()) * kDegToRad;
    double h = sq(std::sin((phi - phi0) / 2.0)) + std::cos(phi0) * std::cos(phi) * sq(std::sin(dpsi / 2.0));
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * earth.radius_km * std::asin(std::sqrt(h));
}

double azimuth_rad(const GeoPoint& center, const GeoPoint& p) {
    if (center == p) return 0.0;
    const double phi0 = center.lat() * kDegToRad;
    const double phi = p.lat() * kDegToRad;
    const double dpsi = (p.lon() - center.lon()) * kDegToRad;
    const double x = std::cos(phi0) * std::sin(phi) - std::sin(phi0) * std::cos(phi) * std::cos(dpsi);
    const double y = std::sin(dpsi) * std::cos(phi);
    if (x == 0.0 && y == 0.0) return 0.0;
    // atan2 may return -pi exactly; the principal value is +pi.
    const double s = std::atan2(y, x);
    return s <= -std::numbers::pi ? std::numbers::pi : s;
}

GeoPoint geo_centroid(std::span<const GeoPoint> points) {
    if (points.empty()) fail("EmptyCluster", "geo_centroid of an empty point set");
    double lat = 0.0;
    double lon = 0.0;
    for (const auto& p : points) {
        lat += p.lat();
        lon += p.lon();
    }
    const auto n = static_cast<double>(points.size());
    return {std::clamp(lat / n, -90.0, 90.0), lon / n};
}

double longitude_spread_deg(std::span<const GeoPoint> points) {
    if (points.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const GeoPoint& a, const GeoPoint& b) { return a.lon() < b.lon(); });
    return hi->lon() - lo->lon();
}

LocalPolar to_local_polar(const GeoPoint& center, const GeoPoint& p, const EarthModel& earth) {
    return {haversine_km(center, p, earth), azimuth_rad(center, p)};
}

}  // namespace geosid
