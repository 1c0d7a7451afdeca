#include "geosid/georope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geosid/error.hpp"
#include "geosid/matrix.hpp"
#include "geosid/rng.hpp"

namespace geosid {

namespace {

void require_even(std::size_t n) {
    if (n % 2 != 0) fail("OddDimension", "rotation needs an even dimension, got " + std::to_string(n));
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// Uniform in (-pi, pi].
double random_angle(Rng& rng) { return std::numbers::pi - 2.0 * std::numbers::pi * rng.uniform01(); }

std::vector<double> mirror(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

AttributeSet AttributeSet::parse(const std::string& text) {
    const std::string all_text = trim(text);
    if (all_text == "all") return all();
    std::uint8_t bits = 0;
    std::stringstream ss(all_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok == "s+" || tok == "sigma+" || tok == "σ+") {
            bits |= sigma_pos;
        } else if (tok == "s-" || tok == "sigma-" || tok == "σ-") {
            bits |= sigma_neg;
        } else if (tok == "d+") {
            bits |= d_pos;
        } else if (tok == "d-") {
            bits |= d_neg;
        } else {
            fail("InvalidAttribute", "unknown geo attribute '" + tok + "'");
        }
    }
    if (bits == 0) fail("EmptyAttributeSet", "at least one geo attribute is required");
    return AttributeSet(bits);
}

std::string AttributeSet::to_string() const {
    std::string out;
    auto add = [&](Bit b, const char* name) {
        if (!has(b)) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(sigma_pos, "s+");
    add(sigma_neg, "s-");
    add(d_pos, "d+");
    add(d_neg, "d-");
    return out;
}

std::vector<AttributeSet> attribute_ablation_rows() {
    using A = AttributeSet;
    return {A(A::d_pos),
            A(A::d_neg),
            A(A::d_pos | A::d_neg),
            A(A::sigma_pos),
            A(A::sigma_neg),
            A(A::sigma_pos | A::sigma_neg),
            A(A::sigma_pos | A::d_pos),
            A::all()};
}

void rotate_blockwise_into(std::span<const double> v, double theta, std::span<double> out) {
    require_even(v.size());
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t i = 0; i < v.size(); i += 2) {
        const double a = v[i];
        const double b = v[i + 1];
        out[i] = c * a - s * b;
        out[i + 1] = s * a + c * b;
    }
}

std::vector<double> rotate_blockwise(std::span<const double> v, double theta) {
    std::vector<double> out(v.size());
    rotate_blockwise_into(v, theta, out);
    return out;
}

std::vector<double> mirror_transform(std::span<const double> v, double theta) {
    require_even(v.size());
    std::vector<double> out(2 * v.size());
    std::span<double> o(out);
    rotate_blockwise_into(v, theta, o.first(v.size()));
    rotate_blockwise_into(v, -theta, o.subspan(v.size()));
    return out;
}

NormalizedGeo normalize_geo(const LocalPolar& polar, double d_scale_km) {
    if (!(d_scale_km > 0.0)) fail("InvalidScale", "distance scale must be positive");
    return {polar.sigma / 2.0, std::numbers::pi * std::min(polar.d_km / d_scale_km, 1.0)};
}

std::size_t geo_vector_dim(std::size_t m_dim, AttributeSet attrs) {
    if (attrs.empty()) fail("EmptyAttributeSet", "at least one geo attribute is required");
    std::size_t copies = 0;
    for (auto b : {AttributeSet::sigma_pos, AttributeSet::sigma_neg, AttributeSet::d_pos, AttributeSet::d_neg}) {
        if (attrs.has(b)) ++copies;
    }
    return (copies == 1 ? 2 : copies) * m_dim;
}

void build_geo_vector_into(std::span<const double> r2, const NormalizedGeo& geo, double alpha, double beta,
                           AttributeSet attrs, std::span<double> out) {
    require_even(r2.size());
    const std::size_t m = r2.size();
    if (out.size() != geo_vector_dim(m, attrs)) fail("DimensionMismatch", "geo vector output has wrong length");
    std::size_t at = 0;
    auto put = [&](double theta) {
        rotate_blockwise_into(r2, theta, out.subspan(at, m));
        at += m;
    };
    const double ts = alpha * geo.sigma_norm;
    const double td = beta * geo.d_norm;
    if (attrs.has(AttributeSet::sigma_pos)) put(ts);
    if (attrs.has(AttributeSet::sigma_neg)) put(-ts);
    if (attrs.has(AttributeSet::d_pos)) put(td);
    if (attrs.has(AttributeSet::d_neg)) put(-td);
    if (at == m) std::copy(r2.begin(), r2.end(), out.begin() + static_cast<std::ptrdiff_t>(m));
}

std::vector<double> build_geo_vector(std::span<const double> r2, const NormalizedGeo& geo, double alpha,
                                     double beta, AttributeSet attrs) {
    std::vector<double> out(geo_vector_dim(r2.size(), attrs));
    build_geo_vector_into(r2, geo, alpha, beta, attrs, out);
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) fail("ZeroVector", "cosine similarity of a zero vector");
    return dot(a, b) / (na * nb);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    return 1.0 - cosine_similarity(a, b);
}

double delta_dcos_measured(std::span<const double> a, std::span<const double> b, double t1, double t2) {
    const auto ta = mirror_transform(a, t1);
    const auto tb = mirror_transform(b, t2);
    return cosine_distance(ta, tb) - cosine_distance(a, b);
}

double delta_dcos_predicted(std::span<const double> a, std::span<const double> b, double t1, double t2) {
    const double s = std::sin((t1 - t2) / 2.0);
    return 2.0 * cosine_similarity(a, b) * s * s;
}

double verify_mirror_identity(std::size_t trials, std::size_t m, std::uint64_t seed) {
    if (trials == 0 || m == 0) fail("InvalidArgument", "trials and m must be at least 1");
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto a = random_vector(rng, 2 * m);
        const auto b = random_vector(rng, 2 * m);
        const double t1 = random_angle(rng);
        const double t2 = random_angle(rng);
        const auto ma = mirror(a);
        const auto mb = mirror(b);
        const double lhs = dot(mirror_transform(a, t1), mirror_transform(b, t2));
        const double rhs = std::cos(t1 - t2) * dot(ma, mb);
        const double scale = std::sqrt(dot(ma, ma)) * std::sqrt(dot(mb, mb));
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

double verify_delta_dcos(std::size_t trials, std::size_t m, std::uint64_t seed) {
    if (trials == 0 || m == 0) fail("InvalidArgument", "trials and m must be at least 1");
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto a = random_vector(rng, 2 * m);
        const auto b = random_vector(rng, 2 * m);
        const double t1 = random_angle(rng);
        const double t2 = random_angle(rng);
        worst = std::max(worst, std::abs(delta_dcos_measured(a, b, t1, t2) - delta_dcos_predicted(a, b, t1, t2)));
    }
    return worst;
}

}  // namespace geosid
