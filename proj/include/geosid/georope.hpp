#pragma once

// Geographic rotary encoding. A residual r in R^M (M = 2m) is rotated block
// by block with the 2x2 rotation R(theta); the mirror transform stacks the
// forward and reverse rotations, [R(theta) r ; R(-theta) r]. For two mirror
// transformed vectors the inner product depends only on the angle
// difference:
//
//     <T(t1) a, T(t2) b> = cos(t1 - t2) * <[a;a], [b;b]>
//
// so the change in cosine distance is 2 cos(a, b) sin^2((t1 - t2) / 2).
// Geography can only separate residuals that are already similar; it
// never makes dissimilar ones alike.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geosid/geo.hpp"

namespace geosid {

/// Angles fed to the rotation: sigma halved into [-pi/2, pi/2] and
/// distance mapped linearly onto [0, pi].
struct NormalizedGeo {
    double sigma_norm = 0.0;
    double d_norm = 0.0;
};

/// Subset of {sigma+, sigma-, d+, d-}: forward / reverse rotation by the
/// azimuth and by the distance angle.
class AttributeSet {
public:
    enum Bit : std::uint8_t { sigma_pos = 1, sigma_neg = 2, d_pos = 4, d_neg = 8 };

    constexpr AttributeSet() = default;
    constexpr explicit AttributeSet(std::uint8_t bits) : bits_(bits & 0x0f) {}

    static constexpr AttributeSet all() { return AttributeSet(0x0f); }
    /// Parses "s+,s-,d+,d-" (also accepts "sigma+" and the Greek letter); "all" for the full set.
    static AttributeSet parse(const std::string& text);

    constexpr bool has(Bit b) const { return (bits_ & b) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }
    std::string to_string() const;

    constexpr bool operator==(const AttributeSet&) const = default;

private:
    std::uint8_t bits_ = 0;
};

/// The eight attribute combinations of the attribute ablation table,
/// in row order: d+, d-, (d+,d-), s+, s-, (s+,s-), (s+,d+), full.
std::vector<AttributeSet> attribute_ablation_rows();

std::vector<double> rotate_blockwise(std::span<const double> v, double theta);
void rotate_blockwise_into(std::span<const double> v, double theta, std::span<double> out);

/// [R(theta) v ; R(-theta) v], length 2M.
std::vector<double> mirror_transform(std::span<const double> v, double theta);

NormalizedGeo normalize_geo(const LocalPolar& polar, double d_scale_km);

/// Output length for an M-dimensional residual under `attrs`.
std::size_t geo_vector_dim(std::size_t m_dim, AttributeSet attrs);

/// Geo-enhanced vector. Azimuth parts come first, then distance parts:
///   sigma+ and sigma- -> T(alpha*sigma_norm) r  (2M)
///   only sigma+       -> R(alpha*sigma_norm) r  (M), only sigma- -> R(-alpha*sigma_norm) r
/// and likewise for d with beta*d_norm. If the result would be only M long
/// (a single attribute), the unrotated r is appended. Full set gives 4M.
std::vector<double> build_geo_vector(std::span<const double> r2, const NormalizedGeo& geo, double alpha,
                                     double beta, AttributeSet attrs);
void build_geo_vector_into(std::span<const double> r2, const NormalizedGeo& geo, double alpha, double beta,
                           AttributeSet attrs, std::span<double> out);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// D_cos(T(t1) a, T(t2) b) - D_cos(a, b), computed by transforming.
double delta_dcos_measured(std::span<const double> a, std::span<const double> b, double t1, double t2);
/// 2 cos(a, b) sin^2((t1 - t2) / 2).
double delta_dcos_predicted(std::span<const double> a, std::span<const double> b, double t1, double t2);

/// Random check of the mirror inner-product identity over `trials` pairs in
/// R^{2m}, angles uniform in (-pi, pi]. The error of each trial is
/// |lhs - rhs| / (|[a;a]| |[b;b]|); the worst one is returned.
double verify_mirror_identity(std::size_t trials, std::size_t m, std::uint64_t seed);

/// Same setup; worst |measured - predicted| change in cosine distance.
double verify_delta_dcos(std::size_t trials, std::size_t m, std::uint64_t seed);

}  // namespace geosid
