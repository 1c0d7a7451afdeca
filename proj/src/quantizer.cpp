#include "geosid/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geosid/error.hpp"
#include "geosid/format.hpp"
#include "geosid/rng.hpp"

namespace geosid {

namespace {

void check_kmeans_args(const Matrix& x, std::size_t k) {
    if (x.empty()) fail("EmptyInput", "k-means needs at least one vector");
    if (k == 0) fail("InvalidK", "k must be at least 1");
    if (k > x.rows()) {
        fail("InvalidK", "k=" + std::to_string(k) + " exceeds vector count " + std::to_string(x.rows()));
    }
}

void round_to_storage(Matrix& m) {
    for (auto& v : m.data()) v = static_cast<double>(static_cast<float>(v));
}

Matrix residuals(ExecPolicy policy, const Matrix& x, const CodebookLayer& layer, std::span<const Code> codes) {
    Matrix out(x.rows(), x.cols());
    if (layer.metric == Metric::cosine) {
        kernels::project_rows(policy, x, layer.centroids, codes, out);
    } else {
        kernels::subtract_rows(policy, x, layer.centroids, codes, out);
    }
    return out;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::pro_geo: return "pro_geo";
        case Variant::rq_kmeans_euclidean: return "rq_kmeans_euclidean";
        case Variant::cosine_only: return "cosine_only";
        case Variant::concat_geo: return "concat_geo";
        case Variant::add_geo: return "add_geo";
    }
    return "unknown";
}

std::string to_string(RopeLayer r) {
    switch (r) {
        case RopeLayer::second: return "second";
        case RopeLayer::third: return "third";
        case RopeLayer::both: return "both";
    }
    return "unknown";
}

std::string to_string(CoordFrame f) { return f == CoordFrame::local ? "local" : "global"; }

Variant parse_variant(const std::string& s) {
    if (s == "pro_geo") return Variant::pro_geo;
    if (s == "rq_kmeans_euclidean" || s == "rq_kmeans") return Variant::rq_kmeans_euclidean;
    if (s == "cosine_only" || s == "none") return Variant::cosine_only;
    if (s == "concat_geo" || s == "concat") return Variant::concat_geo;
    if (s == "add_geo" || s == "add") return Variant::add_geo;
    fail("UnknownVariant", "unknown variant '" + s + "'");
}

RopeLayer parse_rope_layer(const std::string& s) {
    if (s == "second") return RopeLayer::second;
    if (s == "third") return RopeLayer::third;
    if (s == "both") return RopeLayer::both;
    fail("UnknownRopeLayer", "unknown rope layer '" + s + "'");
}

CoordFrame parse_coord_frame(const std::string& s) {
    if (s == "local") return CoordFrame::local;
    if (s == "global") return CoordFrame::global;
    fail("UnknownCoordFrame", "unknown coordinate frame '" + s + "'");
}

void TrainConfig::validate() const {
    if (layer_sizes.size() < 2) fail("InvalidConfig", "need at least two layer sizes");
    for (auto k : layer_sizes) {
        if (k == 0) fail("InvalidConfig", "layer sizes must be positive");
    }
    if (max_iters == 0) fail("InvalidConfig", "max_iters must be positive");
    if (!(tol >= 0.0)) fail("InvalidConfig", "tol must be non-negative");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("InvalidConfig", "alpha must be finite and >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) fail("InvalidConfig", "beta must be finite and >= 0");
    if (!(d_scale_km >= 0.0) || !std::isfinite(d_scale_km)) fail("InvalidConfig", "d_scale_km must be >= 0");
    if (variant == Variant::pro_geo && geo_attributes.empty()) {
        fail("EmptyAttributeSet", "pro_geo needs at least one geo attribute");
    }
}

std::string TrainConfig::label() const {
    std::string out = to_string(variant);
    if (variant == Variant::pro_geo) {
        out += " a=" + shortest(alpha) + " b=" + shortest(beta) + " " + geo_attributes.to_string();
    }
    if (uses_geo()) {
        out += " @" + to_string(rope_layer);
        if (coord_frame == CoordFrame::global) out += " global";
    }
    return out;
}

Code assign_cosine(std::span<const double> r, const CodebookLayer& layer) {
    if (r.size() != layer.dim()) fail("DimensionMismatch", "residual and centroid widths differ");
    Matrix x(1, r.size(), std::vector<double>(r.begin(), r.end()));
    Code code = 0;
    double score = 0.0;
    kernels::serial::assign(x, layer.centroids, Metric::cosine, {&code, 1}, {&score, 1});
    return code;
}

Code assign_euclidean(std::span<const double> r, const CodebookLayer& layer) {
    if (r.size() != layer.dim()) fail("DimensionMismatch", "residual and centroid widths differ");
    Matrix x(1, r.size(), std::vector<double>(r.begin(), r.end()));
    Code code = 0;
    double score = 0.0;
    kernels::serial::assign(x, layer.centroids, Metric::euclidean, {&code, 1}, {&score, 1});
    return code;
}

Code assign(std::span<const double> r, const CodebookLayer& layer) {
    return layer.metric == Metric::cosine ? assign_cosine(r, layer) : assign_euclidean(r, layer);
}

std::vector<double> project_residual(std::span<const double> r, std::span<const double> c) {
    if (r.size() != c.size()) fail("DimensionMismatch", "residual and centroid widths differ");
    const double cc = dot(c, c);
    if (cc == 0.0) fail("DegenerateCentroid", "projection onto a zero centroid");
    const double coef = dot(r, c) / cc;
    std::vector<double> out(r.size());
    for (std::size_t t = 0; t < r.size(); ++t) out[t] = r[t] - coef * c[t];
    return out;
}

double kmeans_objective(const Matrix& x, const Matrix& centroids, std::span<const Code> assignments,
                        Metric metric) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        const auto c = centroids.row(assignments[i]);
        if (metric == Metric::cosine) {
            const double nr = std::sqrt(dot(r, r));
            if (nr == 0.0) continue;
            const double nc = std::sqrt(dot(c, c));
            total += nc == 0.0 ? nr : nr - dot(r, c) / nc;
        } else {
            total += kernels::point_distance(r, c, Metric::euclidean);
        }
    }
    return total;
}

Matrix kmeans_init(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed, ExecPolicy policy) {
    check_kmeans_args(x, k);
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    Matrix centroids(k, dim);
    Rng rng(seed);

    std::vector<char> eligible(n, 1);
    if (metric == Metric::cosine) {
        for (std::size_t i = 0; i < n; ++i) eligible[i] = dot(x.row(i), x.row(i)) > 0.0;
    }
    std::vector<char> chosen(n, 0);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());

    auto place = [&](std::size_t j, std::size_t i) {
        chosen[i] = 1;
        if (eligible[i]) {
            std::copy(x.row(i).begin(), x.row(i).end(), centroids.row(j).begin());
        } else if (dim > 0) {
            // No usable direction left: a unit basis vector keeps the centroid nonzero.
            centroids(j, j % dim) = 1.0;
        }
        kernels::update_min_distance(policy, x, centroids.row(j), metric, min_dist);
    };
    auto pick_uniform = [&]() {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < n; ++i) {
            if (!chosen[i] && eligible[i]) pool.push_back(i);
        }
        if (pool.empty()) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) pool.push_back(i);
            }
        }
        return pool[rng.uniform_index(pool.size())];
    };

    place(0, pick_uniform());
    for (std::size_t j = 1; j < k; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!chosen[i] && eligible[i]) total += std::max(min_dist[i], 0.0);
        }
        if (!(total > 0.0)) {
            place(j, pick_uniform());
            continue;
        }
        const double target = rng.uniform01() * total;
        double cum = 0.0;
        std::size_t pick = n;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i] || !eligible[i]) continue;
            const double w = std::max(min_dist[i], 0.0);
            if (w <= 0.0) continue;
            last_positive = i;
            cum += w;
            if (cum > target) {
                pick = i;
                break;
            }
        }
        place(j, pick < n ? pick : last_positive);
    }
    return centroids;
}

KMeansResult kmeans_lloyd(const Matrix& x, Matrix centroids, Metric metric, const KMeansOptions& opts) {
    check_kmeans_args(x, centroids.rows());
    if (x.cols() != centroids.cols()) fail("DimensionMismatch", "vector and centroid widths differ");
    const std::size_t n = x.rows();
    const std::size_t k = centroids.rows();

    KMeansResult res;
    res.layer.metric = metric;
    std::vector<Code> codes(n);
    std::vector<Code> next(n);
    std::vector<double> score(n);
    kernels::assign(opts.policy, x, centroids, metric, codes, score);
    res.objective_history.push_back(kmeans_objective(x, centroids, codes, metric));

    Matrix sums(k, x.cols());
    std::vector<std::uint64_t> counts(k);
    std::vector<double> dist(n);
    std::vector<char> used(n);
    for (std::uint32_t iter = 1; iter <= opts.max_iters; ++iter) {
        kernels::accumulate(opts.policy, x, codes, sums, counts);
        std::vector<std::size_t> reseed;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                reseed.push_back(j);
                continue;
            }
            const auto count = static_cast<double>(counts[j]);
            auto row = centroids.row(j);
            std::vector<double> prev(row.begin(), row.end());
            for (std::size_t t = 0; t < row.size(); ++t) row[t] = sums(j, t) / count;
            if (metric == Metric::cosine && dot(row, row) == 0.0) {
                std::copy(prev.begin(), prev.end(), row.begin());
                reseed.push_back(j);
            }
        }
        if (!reseed.empty()) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = x.row(i);
                if (metric == Metric::cosine && dot(r, r) == 0.0) {
                    dist[i] = -std::numeric_limits<double>::infinity();
                } else {
                    dist[i] = kernels::point_distance(r, centroids.row(codes[i]), metric);
                }
            }
            std::fill(used.begin(), used.end(), 0);
            for (std::size_t j : reseed) {
                std::size_t best = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (used[i] || dist[i] == -std::numeric_limits<double>::infinity()) continue;
                    if (best == n || dist[i] > dist[best]) best = i;
                }
                if (best == n) continue;  // nothing usable; keep the previous centroid
                used[best] = 1;
                std::copy(x.row(best).begin(), x.row(best).end(), centroids.row(j).begin());
                ++res.repairs;
            }
        }

        kernels::assign(opts.policy, x, centroids, metric, next, score);
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) changed += next[i] != codes[i];
        codes.swap(next);
        res.iterations = iter;
        res.objective_history.push_back(kmeans_objective(x, centroids, codes, metric));
        if (changed == 0 || static_cast<double>(changed) / static_cast<double>(n) < opts.tol) break;
    }
    res.objective = res.objective_history.back();
    res.assignments = std::move(codes);
    res.layer.centroids = std::move(centroids);
    return res;
}

KMeansResult kmeans_train(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed,
                          const KMeansOptions& opts) {
    return kmeans_lloyd(x, kmeans_init(x, k, metric, seed, opts.policy), metric, opts);
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, index); }

LayerFit fit_layer(const Matrix& x, std::size_t k, Metric metric, std::uint64_t seed, const KMeansOptions& opts) {
    auto km = kmeans_train(x, k, metric, seed, opts);
    round_to_storage(km.layer.centroids);
    LayerFit fit = apply_layer(x, km.layer, opts.policy);
    fit.repairs = km.repairs;
    return fit;
}

LayerFit apply_layer(const Matrix& x, const CodebookLayer& layer, ExecPolicy policy) {
    LayerFit fit;
    fit.layer = layer;
    fit.codes.resize(x.rows());
    std::vector<double> score(x.rows());
    kernels::assign(policy, x, layer.centroids, layer.metric, fit.codes, score);
    fit.residual = residuals(policy, x, layer, fit.codes);
    return fit;
}

Hierarchy train_hierarchy(const Matrix& embeddings, const TrainConfig& cfg, ExecPolicy policy) {
    cfg.validate();
    if (embeddings.cols() % 2 != 0) {
        fail("OddDimension", "embedding dimension must be even, got " + std::to_string(embeddings.cols()));
    }
    const KMeansOptions opts{cfg.max_iters, cfg.tol, policy};
    auto first = fit_layer(embeddings, cfg.layer_sizes[0], cfg.metric(), layer_seed(cfg.seed, 0), opts);
    auto second = fit_layer(first.residual, cfg.layer_sizes[1], cfg.metric(), layer_seed(cfg.seed, 1), opts);
    return {std::move(first.layer), std::move(second.layer), std::move(first.codes), std::move(second.codes),
            std::move(first.residual), std::move(second.residual)};
}

ThirdLayer train_third_layer(const Matrix& enhanced, std::size_t k, const TrainConfig& cfg, ExecPolicy policy) {
    const KMeansOptions opts{cfg.max_iters, cfg.tol, policy};
    auto fit = fit_layer(enhanced, k, cfg.metric(), layer_seed(cfg.seed, 2), opts);
    return {std::move(fit.layer), std::move(fit.codes)};
}

std::size_t variant_vector_dim(std::size_t m_dim, const TrainConfig& cfg) {
    switch (cfg.variant) {
        case Variant::pro_geo: return geo_vector_dim(m_dim, cfg.geo_attributes);
        case Variant::concat_geo: return m_dim + 2;
        case Variant::add_geo:
        case Variant::cosine_only:
        case Variant::rq_kmeans_euclidean: return m_dim;
    }
    fail("UnknownVariant", "unknown variant");
}

void build_variant_vector_into(std::span<const double> r, const NormalizedGeo& geo, const TrainConfig& cfg,
                               std::span<double> out) {
    if (out.size() != variant_vector_dim(r.size(), cfg)) fail("DimensionMismatch", "variant output has wrong length");
    switch (cfg.variant) {
        case Variant::pro_geo:
            build_geo_vector_into(r, geo, cfg.alpha, cfg.beta, cfg.geo_attributes, out);
            return;
        case Variant::concat_geo:
            std::copy(r.begin(), r.end(), out.begin());
            out[r.size()] = geo.d_norm;
            out[r.size() + 1] = geo.sigma_norm;
            return;
        case Variant::add_geo:
            for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] + (i % 2 == 0 ? geo.d_norm : geo.sigma_norm);
            return;
        case Variant::cosine_only:
        case Variant::rq_kmeans_euclidean:
            std::copy(r.begin(), r.end(), out.begin());
            return;
    }
    fail("UnknownVariant", "unknown variant");
}

std::vector<double> build_variant_vector(std::span<const double> r, const NormalizedGeo& geo, const TrainConfig& cfg) {
    std::vector<double> out(variant_vector_dim(r.size(), cfg));
    build_variant_vector_into(r, geo, cfg, out);
    return out;
}

}  // namespace geosid
