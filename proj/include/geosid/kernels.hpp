#pragma once

// Data-parallel inner loops of the quantizer. Every kernel has a serial
// reference implementation and an OpenMP one; the two must agree bit for
// bit regardless of thread count (each output element is computed by one
// thread in a fixed order), which tests/test_kernels.cpp checks.

#include <cstdint>
#include <span>
#include <vector>

#include "geosid/matrix.hpp"

namespace geosid {

using Code = std::uint32_t;

enum class Metric : std::uint32_t { cosine = 0, euclidean = 1 };

enum class ExecPolicy { serial, parallel };

namespace kernels {

/// Per-centroid L2 norms.
std::vector<double> row_norms(const Matrix& m);

// Assignment. For cosine, `score` receives the best cosine similarity
// (0 for a zero row, which is assigned to code 0). For euclidean, `score`
// receives the squared distance. Ties go to the lowest index; zero-norm
// centroids never win a cosine assignment.
namespace serial {
void assign(const Matrix& x, const Matrix& centroids, Metric metric, std::span<Code> codes,
            std::span<double> score);
void accumulate(const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts);
void update_min_distance(const Matrix& x, std::span<const double> centroid, Metric metric,
                         std::span<double> min_dist);
void project_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out);
void subtract_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out);
}  // namespace serial

namespace omp {
void assign(const Matrix& x, const Matrix& centroids, Metric metric, std::span<Code> codes,
            std::span<double> score);
void accumulate(const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts);
void update_min_distance(const Matrix& x, std::span<const double> centroid, Metric metric,
                         std::span<double> min_dist);
void project_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out);
void subtract_rows(const Matrix& x, const Matrix& centroids, std::span<const Code> codes, Matrix& out);
}  // namespace omp

void assign(ExecPolicy policy, const Matrix& x, const Matrix& centroids, Metric metric,
            std::span<Code> codes, std::span<double> score);
void accumulate(ExecPolicy policy, const Matrix& x, std::span<const Code> codes, Matrix& sums,
                std::span<std::uint64_t> counts);
void update_min_distance(ExecPolicy policy, const Matrix& x, std::span<const double> centroid,
                         Metric metric, std::span<double> min_dist);
void project_rows(ExecPolicy policy, const Matrix& x, const Matrix& centroids,
                  std::span<const Code> codes, Matrix& out);
void subtract_rows(ExecPolicy policy, const Matrix& x, const Matrix& centroids,
                   std::span<const Code> codes, Matrix& out);

/// Point-to-centroid distance used by seeding and empty-cluster repair:
/// 1 - cos for cosine (1 when either side is zero), squared L2 otherwise.
double point_distance(std::span<const double> x, std::span<const double> c, Metric metric);

/// Caps OpenMP worker count; 0 restores the runtime default.
void set_max_threads(int threads);
/// Reads GEOSID_THREADS and applies it. Returns the value applied (0 = auto).
int configure_threads_from_env();
int max_threads();

}  // namespace kernels
}  // namespace geosid
