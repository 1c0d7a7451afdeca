#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geosid/georope.hpp"
#include "geosid/kernels.hpp"
#include "geosid/matrix.hpp"

namespace geosid {

enum class Variant : std::uint32_t {
    pro_geo = 0,              // cosine RQ + Geo-RoPE
    rq_kmeans_euclidean = 1,  // Euclidean RQ-Kmeans, subtraction residuals, no geo
    cosine_only = 2,          // cosine RQ with projection residuals, no geo
    concat_geo = 3,           // [r; d_norm; sigma_norm]
    add_geo = 4,              // r + tiled (d_norm, sigma_norm)
};

/// Where the geo enhancement is injected: before layer-2 clustering,
/// before layer-3 clustering, or both (chained).
enum class RopeLayer : std::uint32_t { second = 0, third = 1, both = 2 };

/// Origin of the local polar frame: per-cluster geo-centroid, or one
/// centroid over the whole corpus.
enum class CoordFrame : std::uint32_t { local = 0, global = 1 };

std::string to_string(Variant v);
std::string to_string(RopeLayer r);
std::string to_string(CoordFrame f);
Variant parse_variant(const std::string& s);
RopeLayer parse_rope_layer(const std::string& s);
CoordFrame parse_coord_frame(const std::string& s);

struct TrainConfig {
    std::vector<std::uint32_t> layer_sizes{512, 512, 512};
    std::uint32_t max_iters = 100;
    double tol = 1e-4;  // stop when the changed-assignment fraction drops below
    std::uint64_t seed = 0;
    Variant variant = Variant::pro_geo;
    AttributeSet geo_attributes = AttributeSet::all();
    double alpha = 0.5;  // azimuth rotation scale
    double beta = 0.5;   // distance rotation scale
    RopeLayer rope_layer = RopeLayer::third;
    CoordFrame coord_frame = CoordFrame::local;
    double d_scale_km = 0.0;  // 0: per-cluster maximum distance

    void validate() const;
    Metric metric() const { return variant == Variant::rq_kmeans_euclidean ? Metric::euclidean : Metric::cosine; }
    bool uses_geo() const {
        return variant == Variant::pro_geo || variant == Variant::concat_geo || variant == Variant::add_geo;
    }
    /// Short human label, e.g. "pro_geo a=0.5 b=0.5 s+,s-,d+,d- @third".
    std::string label() const;

    bool operator==(const TrainConfig&) const = default;
};

struct CodebookLayer {
    Matrix centroids;  // K x dim
    Metric metric = Metric::cosine;

    std::size_t size() const { return centroids.rows(); }
    std::size_t dim() const { return centroids.cols(); }
    bool operator==(const CodebookLayer&) const = default;
};

struct KMeansOptions {
    std::uint32_t max_iters = 100;
    double tol = 1e-4;
    ExecPolicy policy = ExecPolicy::parallel;
};

struct KMeansResult {
    CodebookLayer layer;
    std::vector<Code> assignments;
    std::uint32_t iterations = 0;
    std::uint32_t repairs = 0;  // empty or zero-norm clusters re-seeded
    double objective = 0.0;
    std::vector<double> objective_history;  // after the initial assignment and each iteration
};

/// Cosine argmax; ties to the lowest index, zero residual to 0.
Code assign_cosine(std::span<const double> r, const CodebookLayer& layer);
/// Euclidean argmin; ties to the lowest index.
Code assign_euclidean(std::span<const double> r, const CodebookLayer& layer);
Code assign(std::span<const double> r, const CodebookLayer& layer);

/// r - (<r,c>/|c|^2) c. Throws DegenerateCentroid for a zero centroid.
std::vector<double> project_residual(std::span<const double> r, std::span<const double> c);

/// Within-cluster objective. Cosine: sum_i |r_i| (1 - cos(r_i, c_ai)), the
/// norm-weighted cosine distance that mean-of-members updates minimize.
/// Euclidean: sum of squared distances.
double kmeans_objective(const Matrix& x, const Matrix& centroids, std::span<const Code> assignments,
                        Metric metric);

/// k-means++ seeding with the metric's point distance (1 - cos or squared
/// L2) as the sampling weight. Zero rows are never picked as cosine seeds.
Matrix kmeans_init(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed,
                   ExecPolicy policy = ExecPolicy::parallel);

/// Lloyd iterations from the given centroids. Empty clusters (and zero-norm
/// cosine centroids) take the member-farthest point, lowest index on ties.
KMeansResult kmeans_lloyd(const Matrix& x, Matrix centroids, Metric metric, const KMeansOptions& opts);

KMeansResult kmeans_train(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed,
                          const KMeansOptions& opts = {});

/// One residual layer: k-means, centroids rounded to the f32 storage
/// precision, final assignment against the rounded centroids, and the
/// residual (projection for cosine, subtraction for euclidean).
struct LayerFit {
    CodebookLayer layer;
    std::vector<Code> codes;
    Matrix residual;
    std::uint32_t repairs = 0;
};

LayerFit fit_layer(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed, const KMeansOptions& opts);

/// Assignment plus residual against an existing layer (no training).
LayerFit apply_layer(const Matrix& x, const CodebookLayer& layer, ExecPolicy policy);

struct Hierarchy {
    CodebookLayer layer1;
    CodebookLayer layer2;
    std::vector<Code> j1;
    std::vector<Code> j2;
    Matrix residual1;
    Matrix residual2;
};

/// Two semantic layers over the embeddings.
Hierarchy train_hierarchy(const Matrix& embeddings, const TrainConfig& cfg, ExecPolicy policy = ExecPolicy::parallel);

struct ThirdLayer {
    CodebookLayer layer;
    std::vector<Code> j3;
};

ThirdLayer train_third_layer(const Matrix& enhanced, std::size_t k, const TrainConfig& cfg,
                             ExecPolicy policy = ExecPolicy::parallel);

/// Seed used for layer `index` (0-based) given the run seed.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t index);

std::size_t variant_vector_dim(std::size_t m_dim, const TrainConfig& cfg);

/// Per-variant layer input: concat -> [r; d_norm; sigma_norm],
/// add -> r[i] + (i even ? d_norm : sigma_norm), pro_geo -> Geo-RoPE vector,
/// cosine_only / euclidean -> r unchanged.
std::vector<double> build_variant_vector(std::span<const double> r, const NormalizedGeo& geo, const TrainConfig& cfg);
void build_variant_vector_into(std::span<const double> r, const NormalizedGeo& geo, const TrainConfig& cfg,
                               std::span<double> out);

}  // namespace geosid
