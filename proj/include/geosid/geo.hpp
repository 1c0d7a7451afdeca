#pragma once

#include <span>

namespace geosid {

/// Latitude/longitude in degrees. Construction validates latitude and
/// folds longitude into (-180, 180].
class GeoPoint {
public:
    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg);

    double lat() const noexcept { return lat_; }
    double lon() const noexcept { return lon_; }

    bool operator==(const GeoPoint&) const = default;

private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

struct EarthModel {
    double radius_km = 6371.0;
};

/// Position relative to a cluster's geo-centroid: great-circle distance in km
/// and azimuth in radians, 0 = due north, +pi/2 = due east.
struct LocalPolar {
    double d_km = 0.0;
    double sigma = 0.0;  // (-pi, pi]
};

double normalize_longitude(double lon_deg);

/// Folds any finite angle into the principal range (-pi, pi].
double wrap_angle(double radians);

/// Haversine distance with `a` as the reference point.
double haversine_km(const GeoPoint& a, const GeoPoint& b, const EarthModel& earth = {});

/// arg(x + iy) of `p` seen from `center`; 0 when the points coincide.
double azimuth_rad(const GeoPoint& center, const GeoPoint& p);

/// Arithmetic mean of latitudes and of longitudes. Throws EmptyCluster.
/// Averages raw longitudes, so clusters straddling the antimeridian get a
/// meaningless mean; check `longitude_spread_deg` first if that matters.
GeoPoint geo_centroid(std::span<const GeoPoint> points);

/// max(lon) - min(lon) over the points, 0 for an empty span.
double longitude_spread_deg(std::span<const GeoPoint> points);

inline bool wide_longitude_spread(std::span<const GeoPoint> points) {
    return longitude_spread_deg(points) > 180.0;
}

LocalPolar to_local_polar(const GeoPoint& center, const GeoPoint& p, const EarthModel& earth = {});

}  // namespace geosid
