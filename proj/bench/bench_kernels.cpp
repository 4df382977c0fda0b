// Serial reference kernels against their OpenMP counterparts.

#include "spine/fem.hpp"
#include "spine/geometry.hpp"
#include "spine/mesh.hpp"
#include "spine/montecarlo.hpp"
#include "spine/sparse.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace spine;

namespace {

const Mesh& bench_mesh(double h) {
    static const Mesh coarse = generate_mesh(build_straight_spine(1.0, 0.1, 1.0), 0.02);
    static const Mesh fine = generate_mesh(build_straight_spine(1.0, 0.1, 1.0), 0.01);
    return h > 0.015 ? coarse : fine;
}

double mesh_h(const benchmark::State& s) { return s.range(0) == 0 ? 0.02 : 0.01; }

template <ExecPolicy P>
void BM_Assembly(benchmark::State& s) {
    const Mesh& m = bench_mesh(mesh_h(s));
    for (auto _ : s)
        benchmark::DoNotOptimize(assemble_system(m, 1.0, 0.0, 0.0, P));
    s.counters["nodes"] = static_cast<double>(m.vertices.size());
}

template <ExecPolicy P>
void BM_Spmv(benchmark::State& s) {
    const FemSystem sys = assemble_system(bench_mesh(mesh_h(s)), 1.0, 0.0, 0.0);
    std::vector<double> x(sys.dofs, 1.0), y(sys.dofs);
    for (auto _ : s) {
        if constexpr (P == ExecPolicy::Serial)
            kernels::serial::spmv(sys.matrix, x, y);
        else
            kernels::omp::spmv(sys.matrix, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(sys.matrix.nnz()));
}

template <ExecPolicy P>
void BM_Dot(benchmark::State& s) {
    std::vector<double> x(s.range(0), 0.5), y(s.range(0), 2.0);
    for (auto _ : s) {
        double d = P == ExecPolicy::Serial ? kernels::serial::dot(x, y) : kernels::omp::dot(x, y);
        benchmark::DoNotOptimize(d);
    }
    s.SetItemsProcessed(s.iterations() * s.range(0));
}

template <ExecPolicy P>
void BM_MonteCarlo(benchmark::State& s) {
    const SpineGeometry g = build_channel(0.1, 0.5);
    WalkConfig cfg;
    cfg.dt = 1e-4;
    cfg.walkers = static_cast<std::size_t>(s.range(0));
    cfg.policy = P;
    for (auto _ : s)
        benchmark::DoNotOptimize(simulate_mfpt(g, cfg, {0.0, 0.0}));
    s.SetItemsProcessed(s.iterations() * s.range(0));
}

} // namespace

BENCHMARK(BM_Assembly<ExecPolicy::Serial>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assembly<ExecPolicy::Parallel>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv<ExecPolicy::Serial>)->Arg(0)->Arg(1);
BENCHMARK(BM_Spmv<ExecPolicy::Parallel>)->Arg(0)->Arg(1);
BENCHMARK(BM_Dot<ExecPolicy::Serial>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Dot<ExecPolicy::Parallel>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_MonteCarlo<ExecPolicy::Serial>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<ExecPolicy::Parallel>)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
