#include <algorithm>
#include <cmath>

#include "geosid/error.hpp"
#include "geosid/kernels.hpp"
#include "kernels_rows.hpp"

namespace geosid::kernels {

std::vector<double> row_norms(const Matrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t j = 0; j < m.rows(); ++j) out[j] = std::sqrt(dot(m.row(j), m.row(j)));
    return out;
}

double point_distance(std::span<const double> x, std::span<const double> c, Metric metric) {
    if (metric == Metric::cosine) {
        const double nx = std::sqrt(dot(x, x));
        const double nc = std::sqrt(dot(c, c));
        if (nx == 0.0 || nc == 0.0) return 1.0;
        return 1.0 - dot(x, c) / (nx * nc);
    }
    double d = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double diff = x[t] - c[t];
        d += diff * diff;
    }
    return d;
}

namespace serial {

void assign(const Matrix& x, const Matrix& centroids, Metric metric, std::span<Code> codes,
            std::span<double> score) {
    const auto norms = row_norms(centroids);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        rows::assign_row(x.row(i), centroids, norms, metric, codes[i], score[i]);
    }
}

void accumulate(const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts) {
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto dst = sums.row(codes[i]);
        const auto src = x.row(i);
        for (std::size_t t = 0; t < src.size(); ++t) dst[t] += src[t];
        ++counts[codes[i]];
    }
}

void update_min_distance(const Matrix& x, std::span<const double> centroid, Metric metric,
                         std::span<double> min_dist) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double d = point_distance(x.row(i), centroid, metric);
        if (d < min_dist[i]) min_dist[i] = d;
    }
}

void project_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (!rows::project_row(x.row(i), centroids.row(codes[i]), out.row(i))) {
            fail("DegenerateCentroid", "projection onto a zero centroid");
        }
    }
}

void subtract_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        const auto c = centroids.row(codes[i]);
        auto o = out.row(i);
        for (std::size_t t = 0; t < r.size(); ++t) o[t] = r[t] - c[t];
    }
}

}  // namespace serial
}  // namespace geosid::kernels
