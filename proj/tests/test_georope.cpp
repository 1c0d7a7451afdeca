#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "geosid/error.hpp"
#include "geosid/georope.hpp"
#include "oracles.hpp"

using namespace geosid;
using doctest::Approx;
using V = std::vector<double>;

namespace {

constexpr double pi = std::numbers::pi;

double norm(const V& v) { return std::sqrt(oracle::dot(v, v)); }

V gaussian(std::mt19937_64& g, std::size_t n) {
    std::normal_distribution<double> d;
    V v(n);
    for (auto& x : v) x = d(g);
    return v;
}

}  // namespace

TEST_CASE("rotate_blockwise fixtures") {
    const V v{0.3, -1.2, 4.0, 0.5};
    CHECK(rotate_blockwise(v, 0.0) == v);
    const auto q = rotate_blockwise(V{1, 0}, pi / 2);
    CHECK(q[0] == Approx(0.0).epsilon(1e-12));
    CHECK(q[1] == Approx(1.0).epsilon(1e-12));
    const auto h = rotate_blockwise(V{1, 0, 2, 0}, pi);
    CHECK(h[0] == Approx(-1.0).epsilon(1e-12));
    CHECK(h[1] == Approx(0.0).epsilon(1e-12));
    CHECK(h[2] == Approx(-2.0).epsilon(1e-12));
    CHECK(h[3] == Approx(0.0).epsilon(1e-12));
    try {
        rotate_blockwise(V{1, 2, 3}, 0.1);
        FAIL("expected OddDimension");
    } catch (const Error& e) {
        CHECK(e.code() == "OddDimension");
    }
}

TEST_CASE("mirror_transform fixtures") {
    const V v{0.3, -1.2, 4.0, 0.5};
    auto m0 = mirror_transform(v, 0.0);
    V vv = v;
    vv.insert(vv.end(), v.begin(), v.end());
    CHECK(m0 == vv);
    const auto m = mirror_transform(V{1, 0}, pi / 2);
    const V expect{0, 1, 0, -1};
    for (int i = 0; i < 4; ++i) CHECK(m[i] == Approx(expect[i]).epsilon(1e-12));
    CHECK_THROWS_AS(mirror_transform(V{1}, 0.2), Error);
}

TEST_CASE("normalize_geo") {
    auto a = normalize_geo({0.0, pi}, 5.0);
    CHECK(a.sigma_norm == pi / 2);
    CHECK(a.d_norm == 0.0);
    auto b = normalize_geo({5.0, 0.0}, 5.0);
    CHECK(b.sigma_norm == 0.0);
    CHECK(b.d_norm == pi);
    auto c = normalize_geo({2.5, -pi / 2}, 5.0);
    CHECK(c.sigma_norm == Approx(-pi / 4));
    CHECK(c.d_norm == Approx(pi / 2));
    CHECK(normalize_geo({50.0, 0.0}, 5.0).d_norm == pi);  // clamped
    CHECK_THROWS_AS(normalize_geo({1.0, 0.0}, 0.0), Error);
    CHECK_THROWS_AS(normalize_geo({1.0, 0.0}, -1.0), Error);
}

TEST_CASE("build_geo_vector layout") {
    const V r{0.5, -1.0, 2.0, 0.25};
    const NormalizedGeo g{0.3, 1.2};

    SUBCASE("full set matches the dense-matrix oracle") {
        const auto out = build_geo_vector(r, g, 0.5, 0.5, AttributeSet::all());
        REQUIRE(out.size() == 16);
        // [T(0.15) r ; T(0.6) r], computed with explicit rotation matrices
        const V expect{0.6438236714416203,  -0.9140520116992427, 1.9401826227536847,  0.546069034431209,
                       0.3449474064944219,  -1.063490144172842,  2.0149016889904843,  -0.05168349546318787,
                       0.9773102808498746,  -0.5430143782121606, 1.5095106114705978,  1.3356188505174904,
                       -0.1519746659401962, -1.107656851607196,  1.7918318481681155,  -0.9229510430626512};
        for (std::size_t i = 0; i < 16; ++i) CHECK(out[i] == Approx(expect[i]).epsilon(1e-14));
        CHECK(norm(out) == Approx(2.0 * norm(r)).epsilon(1e-12));
    }
    SUBCASE("sigma pair at zero angle duplicates r") {
        const auto out = build_geo_vector(r, {0.0, 1.0}, 0.5, 0.5,
                                          AttributeSet(AttributeSet::sigma_pos | AttributeSet::sigma_neg));
        V rr = r;
        rr.insert(rr.end(), r.begin(), r.end());
        CHECK(out == rr);
    }
    SUBCASE("single attribute stacks the unrotated copy") {
        const auto out = build_geo_vector(r, g, 0.5, 0.5, AttributeSet(AttributeSet::sigma_neg));
        REQUIRE(out.size() == 8);
        const auto rot = oracle::dense_rotate(r, -0.15);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(out[i] == Approx(rot[i]).epsilon(1e-14));
            CHECK(out[4 + i] == r[i]);
        }
    }
    SUBCASE("sigma+ with d+ is two forward rotations") {
        const auto out = build_geo_vector(r, g, 0.5, 1.0, AttributeSet(AttributeSet::sigma_pos | AttributeSet::d_pos));
        REQUIRE(out.size() == 8);
        const auto a = oracle::dense_rotate(r, 0.15);
        const auto b = oracle::dense_rotate(r, 1.2);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(out[i] == Approx(a[i]).epsilon(1e-14));
            CHECK(out[4 + i] == Approx(b[i]).epsilon(1e-14));
        }
    }
    SUBCASE("dimensions per attribute set") {
        for (auto attrs : attribute_ablation_rows()) {
            CHECK(build_geo_vector(r, g, 0.5, 0.5, attrs).size() == geo_vector_dim(4, attrs));
        }
        CHECK(geo_vector_dim(4, AttributeSet::all()) == 16);
        CHECK(geo_vector_dim(4, AttributeSet(AttributeSet::d_pos)) == 8);
        CHECK(geo_vector_dim(4, AttributeSet(AttributeSet::d_pos | AttributeSet::d_neg)) == 8);
        CHECK_THROWS_AS(build_geo_vector(r, g, 0.5, 0.5, AttributeSet()), Error);
    }
}

TEST_CASE("attribute sets") {
    CHECK(AttributeSet::parse("all") == AttributeSet::all());
    CHECK(AttributeSet::parse("d+,d-,s+,s-") == AttributeSet::all());
    CHECK(AttributeSet::parse("sigma+, d+") == AttributeSet(AttributeSet::sigma_pos | AttributeSet::d_pos));
    CHECK(AttributeSet::parse("σ-") == AttributeSet(AttributeSet::sigma_neg));
    CHECK(AttributeSet::all().to_string() == "s+,s-,d+,d-");
    CHECK_THROWS_AS(AttributeSet::parse("x+"), Error);
    CHECK_THROWS_AS(AttributeSet::parse(""), Error);
    const auto rows = attribute_ablation_rows();
    REQUIRE(rows.size() == 8);
    CHECK(rows.front() == AttributeSet(AttributeSet::d_pos));
    CHECK(rows.back() == AttributeSet::all());
}

TEST_CASE("inner-product identity fixtures") {
    const V a{1, 2, 3, 4};
    const V b{-1, 0.5, 2, -3};
    // dense-matrix oracle for t1 = 0.3, t2 = -1.1
    CHECK(oracle::dot(mirror_transform(a, 0.3), mirror_transform(b, -1.1)) ==
          Approx(-2.0396057148028874).epsilon(1e-13));
    // equal angles: both sides are exactly 2 <a,b>
    const double same = oracle::dot(mirror_transform(a, 0.7), mirror_transform(b, 0.7));
    CHECK(same == Approx(2.0 * oracle::dot(a, b)).epsilon(1e-14));
    // quarter turn apart: orthogonal
    CHECK(std::abs(oracle::dot(mirror_transform(a, 0.2), mirror_transform(b, 0.2 + pi / 2))) <= 1e-9);
}

TEST_CASE("delta D_cos fixtures") {
    const V a{1, 2, 3, 4};
    const V b{-1, 0.5, 2, -3};
    CHECK(delta_dcos_measured(a, b, 0.3, -1.1) == Approx(-0.24086764985473308).epsilon(1e-12));
    CHECK(delta_dcos_predicted(a, b, 0.3, -1.1) == Approx(-0.240867649854733).epsilon(1e-12));
    CHECK(std::abs(delta_dcos_measured(a, b, 0.4, 0.4)) <= 1e-12);
    const V o1{1, 0, 0, 0}, o2{0, 1, 0, 0};
    CHECK(std::abs(delta_dcos_measured(o1, o2, 0.0, 2.0)) <= 1e-9);
    CHECK(delta_dcos_measured(a, a, pi / 2, -pi / 2) == Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(cosine_similarity(V{0, 0}, V{1, 0}), Error);
}

TEST_CASE("verifiers") {
    CHECK(verify_mirror_identity(200, 8, 3) <= 1e-12);
    CHECK(verify_delta_dcos(200, 8, 3) <= 1e-12);
    CHECK(verify_mirror_identity(10, 4, 5) == verify_mirror_identity(10, 4, 5));
    CHECK_THROWS_AS(verify_mirror_identity(0, 4, 1), Error);
}

TEST_CASE("property: rotations are orthogonal and compose") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> ang(-10, 10);
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = 2 * (1 + t % 16);
        const V v = gaussian(gen, m);
        const double t1 = ang(gen), t2 = ang(gen);
        const auto r1 = rotate_blockwise(v, t1);
        CHECK(norm(r1) == Approx(norm(v)).epsilon(1e-12));
        const auto r12 = rotate_blockwise(r1, t2);
        const auto direct = rotate_blockwise(v, t1 + t2);
        for (std::size_t i = 0; i < m; ++i) CHECK(r12[i] == Approx(direct[i]).epsilon(1e-12));
        const auto dense = oracle::dense_rotate(v, t1);
        for (std::size_t i = 0; i < m; ++i) CHECK(r1[i] == Approx(dense[i]).epsilon(1e-12));
        CHECK(norm(mirror_transform(v, t1)) == Approx(std::sqrt(2.0) * norm(v)).epsilon(1e-12));
    }
}

TEST_CASE("property: only the angle difference matters") {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> ang(-pi, pi);
    for (int t = 0; t < 300; ++t) {
        const V a = gaussian(gen, 8), b = gaussian(gen, 8);
        const double t1 = ang(gen), t2 = ang(gen), shift = ang(gen);
        const double d0 = cosine_distance(mirror_transform(a, t1), mirror_transform(b, t2));
        const double d1 = cosine_distance(mirror_transform(a, t1 + shift), mirror_transform(b, t2 + shift));
        CHECK(d0 == Approx(d1).epsilon(1e-12));
    }
}

TEST_CASE("property: delta D_cos grows with |dtheta| when cos > 0") {
    std::mt19937_64 gen(23);
    for (int t = 0; t < 100; ++t) {
        V a = gaussian(gen, 6);
        V b = a;
        for (auto& x : b) x += 0.3 * std::normal_distribution<double>()(gen);
        REQUIRE(cosine_similarity(a, b) > 0.0);
        double prev = -1e-15;
        for (int s = 0; s <= 20; ++s) {
            const double d = delta_dcos_predicted(a, b, s * pi / 20, 0.0);
            CHECK(d >= prev - 1e-15);
            CHECK(delta_dcos_measured(a, b, s * pi / 20, 0.0) == Approx(d).epsilon(1e-12));
            prev = d;
        }
    }
}
