#pragma once

// Per-row bodies shared by the serial and OpenMP kernels, so both paths run
// exactly the same floating-point operations in the same order.

#include <cmath>
#include <limits>
#include <span>

#include "geosid/kernels.hpp"

namespace geosid::kernels::rows {

inline void assign_row(std::span<const double> r, const Matrix& centroids, std::span<const double> norms,
                       Metric metric, Code& code, double& score) {
    const std::size_t k = centroids.rows();
    if (metric == Metric::cosine) {
        const double rnorm = std::sqrt(dot(r, r));
        if (rnorm == 0.0) {
            code = 0;
            score = 0.0;
            return;
        }
        // argmax <r,c>/|c| equals argmax cos(r,c); |r| is common to all j.
        double best = -std::numeric_limits<double>::infinity();
        Code best_j = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (norms[j] == 0.0) continue;
            const double s = dot(r, centroids.row(j)) / norms[j];
            if (s > best) {
                best = s;
                best_j = static_cast<Code>(j);
            }
        }
        code = best_j;
        score = best == -std::numeric_limits<double>::infinity() ? 0.0 : best / rnorm;
        return;
    }
    double best = std::numeric_limits<double>::infinity();
    Code best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const auto c = centroids.row(j);
        double d = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            const double diff = r[t] - c[t];
            d += diff * diff;
        }
        if (d < best) {
            best = d;
            best_j = static_cast<Code>(j);
        }
    }
    code = best_j;
    score = best;
}

/// Returns false when the centroid is zero and the row is not.
inline bool project_row(std::span<const double> r, std::span<const double> c, std::span<double> out) {
    const double rr = dot(r, r);
    if (rr == 0.0) {
        for (std::size_t t = 0; t < r.size(); ++t) out[t] = r[t];
        return true;
    }
    const double cc = dot(c, c);
    if (cc == 0.0) return false;
    const double coef = dot(r, c) / cc;
    for (std::size_t t = 0; t < r.size(); ++t) out[t] = r[t] - coef * c[t];
    return true;
}

}  // namespace geosid::kernels::rows
