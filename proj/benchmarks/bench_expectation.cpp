#include <benchmark/benchmark.h>

#include <random>

#include "wgs/optimize.hpp"

using namespace wgs;

namespace {

SuperpositionAnsatz random_point(const ParameterPacking& packing, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.3);
    RVector v(packing.size());
    for (auto& x : v) x = nd(rng);
    return packing.unpack(v);
}

// Energy of a translation-invariant ansatz on a ring: one block per term class.
void BM_EnergyTranslationInvariant(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    const auto lat = build_lattice(1, {n}, true);
    SymmetryProfile sym;
    sym.mode = SymmetryMode::fully_translation_invariant;
    sym.lattice = lat;
    const auto ans = random_point(ParameterPacking(sym, n, m), 3);
    const EnergyModel model(ising(lat, 1.0), sym);
    for (auto _ : state) benchmark::DoNotOptimize(model(ans));
    state.SetComplexityN(n);
}
BENCHMARK(BM_EnergyTranslationInvariant)
    ->ArgsProduct({{64, 128, 256, 512}, {1, 2, 4}})
    ->Unit(benchmark::kMicrosecond);

// Same chain without symmetry: every bond and site term gets its own block.
void BM_EnergyFree(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto lat = build_lattice(1, {n}, true);
    SymmetryProfile sym;
    const auto ans = random_point(ParameterPacking(sym, n, 2), 4);
    const EnergyModel model(ising(lat, 1.0), sym);
    for (auto _ : state) benchmark::DoNotOptimize(model(ans));
}
BENCHMARK(BM_EnergyFree)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ReducedDensity(benchmark::State& state) {
    const int n = 128;
    const int k = static_cast<int>(state.range(0));
    SymmetryProfile sym;
    const auto ans = random_point(ParameterPacking(sym, n, 2), 5);
    std::vector<int> sites(k);
    for (int i = 0; i < k; ++i) sites[i] = 7 * i;
    for (auto _ : state) benchmark::DoNotOptimize(reduced_density(ans, sites));
}
BENCHMARK(BM_ReducedDensity)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
