// Serial reference vs OpenMP kernels. Arg 0 is the row count; the other
// shapes are fixed at a typical embedding width and codebook size.
// GEOSID_THREADS caps the worker count.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "geosid/kernels.hpp"
#include "geosid/quantizer.hpp"

using namespace geosid;

namespace {

constexpr std::size_t kDim = 64;
constexpr std::size_t kCodes = 256;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d;
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = d(g);
    return m;
}

template <ExecPolicy P>
void BM_assign(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, kDim, 1);
    const Matrix c = random_matrix(kCodes, kDim, 2);
    std::vector<Code> codes(n);
    std::vector<double> score(n);
    for (auto _ : state) {
        kernels::assign(P, x, c, Metric::cosine, codes, score);
        benchmark::DoNotOptimize(codes.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <ExecPolicy P>
void BM_accumulate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, kDim, 3);
    std::vector<Code> codes(n);
    for (std::size_t i = 0; i < n; ++i) codes[i] = static_cast<Code>((i * 2654435761u) % kCodes);
    Matrix sums(kCodes, kDim);
    std::vector<std::uint64_t> counts(kCodes);
    for (auto _ : state) {
        kernels::accumulate(P, x, codes, sums, counts);
        benchmark::DoNotOptimize(sums.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <ExecPolicy P>
void BM_project_rows(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, kDim, 4);
    const Matrix c = random_matrix(kCodes, kDim, 5);
    std::vector<Code> codes(n);
    for (std::size_t i = 0; i < n; ++i) codes[i] = static_cast<Code>(i % kCodes);
    Matrix out(n, kDim);
    for (auto _ : state) {
        kernels::project_rows(P, x, c, codes, out);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <ExecPolicy P>
void BM_kmeans_train(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, kDim, 6);
    KMeansOptions opts;
    opts.max_iters = 10;
    opts.policy = P;
    for (auto _ : state) {
        auto res = kmeans_train(x, 64, Metric::cosine, 7, opts);
        benchmark::DoNotOptimize(res.objective);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(BM_assign<ExecPolicy::serial>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_assign<ExecPolicy::parallel>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_accumulate<ExecPolicy::serial>)->Arg(1 << 15);
BENCHMARK(BM_accumulate<ExecPolicy::parallel>)->Arg(1 << 15);
BENCHMARK(BM_project_rows<ExecPolicy::serial>)->Arg(1 << 15);
BENCHMARK(BM_project_rows<ExecPolicy::parallel>)->Arg(1 << 15);
BENCHMARK(BM_kmeans_train<ExecPolicy::serial>)->Arg(1 << 13)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kmeans_train<ExecPolicy::parallel>)->Arg(1 << 13)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    kernels::configure_threads_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
