#include <algorithm>
#include <vector>
#include <cstdint>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "geosid/error.hpp"
#include "geosid/kernels.hpp"
#include "kernels_rows.hpp"

namespace geosid::kernels {

namespace omp {

void assign(const Matrix& x, const Matrix& centroids, Metric metric, std::span<Code> codes,
            std::span<double> score) {
    const auto norms = row_norms(centroids);
    const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        rows::assign_row(x.row(u), centroids, norms, metric, codes[u], score[u]);
    }
}

// Rows are bucketed by cluster, then clusters are summed in parallel. Each
// cluster still adds its members in point order, matching the serial kernel.
void accumulate(const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts) {
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    const std::size_t n = x.rows();
    for (std::size_t i = 0; i < n; ++i) ++counts[codes[i]];
    std::vector<std::size_t> start(counts.size() + 1, 0);
    for (std::size_t j = 0; j < counts.size(); ++j) start[j + 1] = start[j] + counts[j];
    std::vector<std::size_t> order(n);
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) order[fill[codes[i]]++] = i;
    const auto k = static_cast<std::int64_t>(counts.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t j = 0; j < k; ++j) {
        const auto u = static_cast<std::size_t>(j);
        auto dst = sums.row(u);
        for (std::size_t p = start[u]; p < start[u + 1]; ++p) {
            const auto src = x.row(order[p]);
            for (std::size_t t = 0; t < src.size(); ++t) dst[t] += src[t];
        }
    }
}

void update_min_distance(const Matrix& x, std::span<const double> centroid, Metric metric,
                         std::span<double> min_dist) {
    const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double d = point_distance(x.row(u), centroid, metric);
        if (d < min_dist[u]) min_dist[u] = d;
    }
}

void project_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out) {
    const auto n = static_cast<std::int64_t>(x.rows());
    int degenerate = 0;
#pragma omp parallel for schedule(static) reduction(| : degenerate)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (!rows::project_row(x.row(u), centroids.row(codes[u]), out.row(u))) degenerate |= 1;
    }
    if (degenerate) fail("DegenerateCentroid", "projection onto a zero centroid");
}

void subtract_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out) {
    const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const auto r = x.row(u);
        const auto c = centroids.row(codes[u]);
        auto o = out.row(u);
        for (std::size_t t = 0; t < r.size(); ++t) o[t] = r[t] - c[t];
    }
}

}  // namespace omp

void assign(ExecPolicy policy, const Matrix& x, const Matrix& centroids, Metric metric,
            std::span<Code> codes, std::span<double> score) {
    if (x.cols() != centroids.cols()) fail("DimensionMismatch", "vector and centroid widths differ");
    if (codes.size() < x.rows() || score.size() < x.rows()) fail("DimensionMismatch", "output too small");
    if (policy == ExecPolicy::parallel) {
        omp::assign(x, centroids, metric, codes, score);
    } else {
        serial::assign(x, centroids, metric, codes, score);
    }
}

void accumulate(ExecPolicy policy, const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts) {
    if (policy == ExecPolicy::parallel) {
        omp::accumulate(x, codes, sums, counts);
    } else {
        serial::accumulate(x, codes, sums, counts);
    }
}

void update_min_distance(ExecPolicy policy, const Matrix& x, std::span<const double> centroid,
                         Metric metric, std::span<double> min_dist) {
    if (policy == ExecPolicy::parallel) {
        omp::update_min_distance(x, centroid, metric, min_dist);
    } else {
        serial::update_min_distance(x, centroid, metric, min_dist);
    }
}

void project_rows(ExecPolicy policy, const Matrix& x, const Matrix& centroids,
                  std::span<const Code> codes, Matrix& out) {
    if (policy == ExecPolicy::parallel) {
        omp::project_rows(x, centroids, codes, out);
    } else {
        serial::project_rows(x, centroids, codes, out);
    }
}

void subtract_rows(ExecPolicy policy, const Matrix& x, const Matrix& centroids,
                   std::span<const Code> codes, Matrix& out) {
    if (policy == ExecPolicy::parallel) {
        omp::subtract_rows(x, centroids, codes, out);
    } else {
        serial::subtract_rows(x, centroids, codes, out);
    }
}

void set_max_threads(int threads) {
#ifdef _OPENMP
    static const int default_threads = omp_get_max_threads();
    omp_set_num_threads(threads > 0 ? threads : default_threads);
#else
    (void)threads;
#endif
}

int configure_threads_from_env() {
    const char* raw = std::getenv("GEOSID_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (*end != '\0' || v < 0) fail("InvalidEnvironment", std::string("GEOSID_THREADS=") + raw);
    set_max_threads(static_cast<int>(v));
    return static_cast<int>(v);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace geosid::kernels
