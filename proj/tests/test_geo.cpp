#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "geosid/error.hpp"
#include "geosid/geo.hpp"
#include "oracles.hpp"

using namespace geosid;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("haversine fixtures") {
    CHECK(haversine_km({0, 0}, {0, 0}) == 0.0);
    // R * pi / 180 and R * pi / 2 with R = 6371
    CHECK(haversine_km({0, 0}, {0, 1}) == Approx(111.19492664455873).epsilon(1e-12));
    CHECK(haversine_km({0, 0}, {90, 0}) == Approx(10007.543398010286).epsilon(1e-12));
    // Shanghai -> Beijing, chord-length oracle
    CHECK(haversine_km({31.2304, 121.4737}, {39.9042, 116.4074}) == Approx(1067.3101709271289).epsilon(1e-11));
    // across the antimeridian
    CHECK(haversine_km({10, 179.5}, {-5, -179.0}) == Approx(1676.1793504064613).epsilon(1e-11));
}

TEST_CASE("haversine honours the earth radius") {
    CHECK(haversine_km({0, 0}, {0, 1}, EarthModel{1.0}) == Approx(pi / 180.0).epsilon(1e-14));
    CHECK_THROWS_AS(haversine_km({0, 0}, {0, 1}, EarthModel{0.0}), Error);
}

TEST_CASE("azimuth conventions") {
    CHECK(azimuth_rad({0, 0}, {1, 0}) == 0.0);
    CHECK(azimuth_rad({0, 0}, {0, 1}) == Approx(pi / 2).epsilon(1e-15));
    CHECK(azimuth_rad({0, 0}, {0, 0}) == 0.0);
    CHECK(azimuth_rad({0, 0}, {-1, 0}) == pi);  // due south is +pi, never -pi
    CHECK(azimuth_rad({0, 0}, {0, -1}) == Approx(-pi / 2).epsilon(1e-15));
    CHECK(azimuth_rad({31.2304, 121.4737}, {39.9042, 116.4074}) == Approx(-0.41836822733908335).epsilon(1e-12));
    CHECK(azimuth_rad({10, 179.5}, {-5, -179.0}) == Approx(3.041153590040999).epsilon(1e-12));
}

TEST_CASE("geo_centroid") {
    const std::vector<GeoPoint> one{{10, 20}};
    CHECK(geo_centroid(one) == GeoPoint(10, 20));
    const std::vector<GeoPoint> two{{0, 0}, {2, 4}};
    CHECK(geo_centroid(two) == GeoPoint(1, 2));
    try {
        geo_centroid(std::vector<GeoPoint>{});
        FAIL("expected EmptyCluster");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyCluster");
    }
}

TEST_CASE("to_local_polar") {
    const auto p0 = to_local_polar({0, 0}, {0, 0});
    CHECK(p0.d_km == 0.0);
    CHECK(p0.sigma == 0.0);
    const auto east = to_local_polar({0, 0}, {0, 1});
    CHECK(std::abs(east.d_km - 111.1949) <= 1e-3);
    CHECK(east.sigma == Approx(pi / 2));
    const auto north = to_local_polar({0, 0}, {1, 0});
    CHECK(std::abs(north.d_km - 111.1949) <= 1e-3);
    CHECK(north.sigma == 0.0);
}

TEST_CASE("GeoPoint validation and longitude folding") {
    CHECK_THROWS_AS(GeoPoint(91, 0), Error);
    CHECK_THROWS_AS(GeoPoint(-90.5, 0), Error);
    CHECK_THROWS_AS(GeoPoint(std::nan(""), 0), Error);
    CHECK(GeoPoint(0, 180).lon() == 180.0);
    CHECK(GeoPoint(0, -180).lon() == 180.0);
    CHECK(GeoPoint(0, 190).lon() == Approx(-170.0));
    CHECK(GeoPoint(0, -540).lon() == 180.0);
}

TEST_CASE("wrap_angle") {
    CHECK(wrap_angle(-pi) == pi);
    CHECK(wrap_angle(3 * pi) == Approx(pi));
    CHECK(wrap_angle(0.5) == 0.5);
}

TEST_CASE("longitude spread diagnostic") {
    const std::vector<GeoPoint> city{{31.2, 121.4}, {31.3, 121.6}};
    CHECK_FALSE(wide_longitude_spread(city));
    const std::vector<GeoPoint> straddle{{0, 179.5}, {0, -179.5}};
    CHECK(wide_longitude_spread(straddle));
}

TEST_CASE("property: haversine symmetric, bounded, matches chord oracle") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (int t = 0; t < 2000; ++t) {
        const GeoPoint a(lat(gen), lon(gen));
        const GeoPoint b(lat(gen), lon(gen));
        const double ab = haversine_km(a, b);
        CHECK(std::abs(ab - haversine_km(b, a)) <= 1e-9);
        CHECK(ab >= 0.0);
        CHECK(ab <= pi * 6371.0);
        CHECK(ab == Approx(oracle::chord_distance_km(a.lat(), a.lon(), b.lat(), b.lon())).epsilon(1e-9));
    }
}

TEST_CASE("property: azimuth in (-pi, pi] and matches tangent-plane oracle") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), off(-2, 2);
    for (int t = 0; t < 2000; ++t) {
        const GeoPoint c(lat(gen), lon(gen));
        const GeoPoint p(c.lat() + off(gen), c.lon() + off(gen));
        const double s = azimuth_rad(c, p);
        CHECK(s > -pi);
        CHECK(s <= pi);
        CHECK(s == Approx(oracle::tangent_bearing(c.lat(), c.lon(), p.lat(), p.lon())).epsilon(1e-9));
    }
}
