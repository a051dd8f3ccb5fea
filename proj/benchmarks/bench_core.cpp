#include <benchmark/benchmark.h>

#include <memory>

#include "sdlab/cz_decomposition.hpp"
#include "sdlab/maximal.hpp"
#include "sdlab/sparse_forms.hpp"
#include "sdlab/weight_constants.hpp"

using namespace sdlab;

namespace {

GridFunction sample(CellLattice lat, std::uint64_t seed, double lo = 0.5, double hi = 2.0) {
    RandomSpec spec;
    spec.seed = seed;
    spec.kind = RandomKind::Uniform;
    spec.lo = lo;
    spec.hi = hi;
    return synthesize(spec, lat);
}

}  // namespace

static void BM_Maximal(benchmark::State& state) {
    const Grid g(GridSpec{1, static_cast<int>(state.range(0)), {}});
    const auto f = sample(g.lattice(), 1);
    const Weight u(sample(g.lattice(), 2));
    for (auto _ : state) benchmark::DoNotOptimize(dyadic_maximal(f, u, 0.25, g));
    state.SetComplexityN(static_cast<benchmark::IterationCount>(f.size()));
}
BENCHMARK(BM_Maximal)->DenseRange(8, 16, 4)->Complexity();

static void BM_MaximalBrute(benchmark::State& state) {
    const Grid g(GridSpec{1, static_cast<int>(state.range(0)), {}});
    const auto f = sample(g.lattice(), 1);
    const Weight u(sample(g.lattice(), 2));
    for (auto _ : state) benchmark::DoNotOptimize(dyadic_maximal_brute(f, u, 0.25, g));
}
BENCHMARK(BM_MaximalBrute)->DenseRange(6, 10, 2);

static void BM_ArPq(benchmark::State& state) {
    const CellLattice lat{1, static_cast<int>(state.range(0))};
    const auto grids = all_shifted_grids(lat);
    const Weight w(sample(lat, 3, 0.1, 10.0));
    for (auto _ : state) benchmark::DoNotOptimize(ar_pq_constant(w, 2.0, 4.0, 0.25, grids));
}
BENCHMARK(BM_ArPq)->DenseRange(6, 12, 3);

static void BM_Doubling(benchmark::State& state) {
    const CellLattice lat{1, static_cast<int>(state.range(0))};
    const auto grids = all_shifted_grids(lat);
    const Weight w(sample(lat, 4, 0.1, 10.0));
    for (auto _ : state) benchmark::DoNotOptimize(doubling_constant(w, 0.3, grids));
}
BENCHMARK(BM_Doubling)->DenseRange(6, 12, 3);

static void BM_SparseOperator(benchmark::State& state) {
    const auto grid = std::make_shared<const Grid>(GridSpec{2, static_cast<int>(state.range(0)), {}});
    const auto f = sample(grid->lattice(), 5, 0.0, 1.0);
    const SparseFamily s = build_stopping_family(f, 1.0, grid, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(sparse_operator(s, f, 0.5));
}
BENCHMARK(BM_SparseOperator)->DenseRange(3, 6, 1);

static void BM_CZ(benchmark::State& state) {
    const Grid g(GridSpec{1, static_cast<int>(state.range(0)), {}});
    const auto h = sample(g.lattice(), 6, 0.0, 4.0);
    const Weight u(sample(g.lattice(), 7));
    for (auto _ : state) benchmark::DoNotOptimize(decompose(h, u, 5.0, g));
}
BENCHMARK(BM_CZ)->DenseRange(8, 16, 4);
BENCHMARK_MAIN();
