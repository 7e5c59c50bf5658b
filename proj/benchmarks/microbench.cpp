#include <benchmark/benchmark.h>

#include <random>

#include "fastop/fastop.hpp"

using namespace fastop;

namespace {

DenseBatch random_column(index_t n, bool complex, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return verify::random_batch(n, 1, complex ? ScalarField::Complex128 : ScalarField::Real64, rng);
}

void BM_Fwht(benchmark::State& state) {
    const index_t n = static_cast<index_t>(state.range(0));
    const auto op = make_hadamard(transforms::log2_exact(n));
    const DenseBatch x = random_column(n, false, 1);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fwht)->RangeMultiplier(4)->Range(1 << 8, 1 << 20)->Complexity(benchmark::oNLogN);

void BM_DftPow2(benchmark::State& state) {
    const index_t n = static_cast<index_t>(state.range(0));
    const auto op = make_fourier(n);
    const DenseBatch x = random_column(n, true, 2);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DftPow2)->RangeMultiplier(4)->Range(1 << 8, 1 << 20)->Complexity(benchmark::oNLogN);

void BM_DftBluestein(benchmark::State& state) {
    const index_t n = static_cast<index_t>(state.range(0));
    const auto op = make_fourier(n);
    const DenseBatch x = random_column(n, true, 3);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DftBluestein)->Arg(1000)->Arg(10007)->Arg(100003)->Complexity(benchmark::oNLogN);

void BM_Circulant(benchmark::State& state) {
    const index_t n = static_cast<index_t>(state.range(0));
    const auto op = make_circulant(bench::deconvolution_kernel(n, 4));
    const DenseBatch x = random_column(n, false, 5);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Circulant)->RangeMultiplier(4)->Range(1 << 8, 1 << 20)->Complexity(benchmark::oNLogN);

void BM_KronForward(benchmark::State& state) {
    const index_t k = static_cast<index_t>(state.range(0));
    std::mt19937_64 rng(6);
    const auto op = kron({make_fourier(k),
                          make_diagonal(std::vector<double>(k, 2.0)),
                          make_dense(verify::random_batch(k, k, ScalarField::Complex128, rng))});
    const DenseBatch x = random_column(k * k * k, false, 7);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
}
BENCHMARK(BM_KronForward)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_DenseForward(benchmark::State& state) {
    const index_t n = static_cast<index_t>(state.range(0));
    std::mt19937_64 rng(8);
    const auto op = make_dense(verify::random_batch(n, n, ScalarField::Real64, rng));
    const DenseBatch x = random_column(n, false, 9);
    for (auto _ : state) benchmark::DoNotOptimize(op->forward(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DenseForward)->RangeMultiplier(4)->Range(1 << 6, 1 << 12)->Complexity(benchmark::oNSquared);

}  // namespace

BENCHMARK_MAIN();
