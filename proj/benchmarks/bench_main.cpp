// Microbenchmarks for the kernels that dominate wall time: series products,
// germ composition, the normal-form sweep, the connection solve, and the
// invariant-section counter.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hopf/cohomology.hpp"
#include "hopf/connection.hpp"
#include "hopf/germ.hpp"
#include "hopf/normal_form.hpp"
#include "hopf/series.hpp"
#include "hopf/spectral.hpp"

namespace {

using hopf::Complex;
using hopf::MapGerm;
using hopf::TruncatedSeries;

TruncatedSeries dense_series(std::mt19937_64& rng, int n, int cap) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    TruncatedSeries s(n, cap);
    std::vector<int> e(std::size_t(n), 0);
    const auto next = [&] {
        for (int i = 0; i < n; ++i) {
            if (++e[std::size_t(i)] <= cap) return true;
            e[std::size_t(i)] = 0;
        }
        return false;
    };
    do {
        int total = 0;
        for (int v : e) total += v;
        if (total <= cap) s.set_coefficient(hopf::MonomialIndex(e), Complex(unit(rng), unit(rng)));
    } while (next());
    return s;
}

Eigen::MatrixXcd contraction(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> mod(0.35, 0.8);
    std::uniform_real_distribution<double> arg(0.0, 6.28318530717958647692);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = std::polar(mod(rng), arg(rng));
    return a;
}

MapGerm quadratic_germ(std::mt19937_64& rng, int n, int cap) {
    const Eigen::MatrixXcd a = contraction(rng, n);
    std::uniform_real_distribution<double> unit(-0.4, 0.4);
    std::vector<TruncatedSeries> comps;
    for (int i = 0; i < n; ++i) {
        TruncatedSeries s(n, cap);
        for (int j = 0; j < n; ++j) {
            std::vector<int> e(std::size_t(n), 0);
            e[std::size_t(j)] = 1;
            s.set_coefficient(hopf::MonomialIndex(e), a(i, j));
        }
        for (int j = 0; j < n; ++j) {
            std::vector<int> e(std::size_t(n), 0);
            e[std::size_t(j)] = 2;
            s.set_coefficient(hopf::MonomialIndex(e), Complex(unit(rng), unit(rng)));
        }
        comps.push_back(std::move(s));
    }
    return MapGerm(std::move(comps));
}

void BM_SeriesMultiply(benchmark::State& state) {
    const int n = 3, cap = int(state.range(0));
    std::mt19937_64 rng(17);
    const TruncatedSeries a = dense_series(rng, n, cap);
    const TruncatedSeries b = dense_series(rng, n, cap);
    for (auto _ : state) benchmark::DoNotOptimize(a * b);
}

void BM_GermCompose(benchmark::State& state) {
    const int n = 3, cap = int(state.range(0));
    std::mt19937_64 rng(18);
    const MapGerm f = quadratic_germ(rng, n, cap);
    const MapGerm g = quadratic_germ(rng, n, cap);
    for (auto _ : state) benchmark::DoNotOptimize(hopf::compose_germs(f, g));
}

void BM_Linearize(benchmark::State& state) {
    const int cap = int(state.range(0));
    std::mt19937_64 rng(19);
    const MapGerm g = quadratic_germ(rng, 3, cap);
    for (auto _ : state) benchmark::DoNotOptimize(hopf::linearize(g));
}

void BM_ConnectionSolve(benchmark::State& state) {
    const int cap = int(state.range(0));
    std::mt19937_64 rng(20);
    const MapGerm g = quadratic_germ(rng, 3, cap);
    const hopf::EquivariantBundle bundle = hopf::EquivariantBundle::tangent(g);
    for (auto _ : state) benchmark::DoNotOptimize(hopf::solve_equivariant_connection(bundle));
}

void BM_SectionCount(benchmark::State& state) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mod(0.25, 0.85);
    std::vector<Complex> alpha;
    for (int i = 0; i < 4; ++i) alpha.push_back(Complex(mod(rng), 0.0));
    alpha[1] = alpha[0] * alpha[0];  // keep a nonempty answer in play
    const hopf::TensorBundleSpec twisted_endo{1, 2, 0, std::nullopt};
    for (auto _ : state)
        benchmark::DoNotOptimize(hopf::invariant_section_dim(alpha, twisted_endo, 1e-9));
}

}  // namespace

BENCHMARK(BM_SeriesMultiply)->Arg(6)->Arg(8)->Arg(10);
BENCHMARK(BM_GermCompose)->Arg(6)->Arg(8);
BENCHMARK(BM_Linearize)->Arg(6)->Arg(8);
BENCHMARK(BM_ConnectionSolve)->Arg(4)->Arg(6);
BENCHMARK(BM_SectionCount);

BENCHMARK_MAIN();
